/**
 * Detection interchange format: one record per line,
 * `category label confidence cx cy w h`, normalized coordinates.
 * This mirrors the format the assembly engine's loader accepts.
 */

export type Detection = {
  category: string
  label: string
  confidence: number
  /** box center x, normalized to image width */
  cx: number
  /** box center y, normalized to image height */
  cy: number
  w: number
  h: number
}

/** Labels the assembly engine knows, per category. */
export const LABELS: Record<string, string[]> = {
  measure: ['x0', 'x1', 'y0'],
  accidental: ['ac0', 'ac1', 'ac2'],
  arm_beam: ['am0', 'am1', 'am2', 'am3', 'bm0', 'bm1', 'bm2', 'bm3'],
  body: ['bd0', 'bd1', 'bd2', 'bd3', 'bd4', 'bd5'],
  clef: ['cf0', 'cf1', 'cf2'],
  rest: ['re0', 're1', 're2', 're3', 're4', 're5'],
}

export const CATEGORIES = Object.keys(LABELS)

export function clamp01(value: number): number {
  return Math.min(1, Math.max(0, value))
}

/** Clamp a box into the unit square; model output can spill past edges. */
export function clampBox(det: Detection): Detection {
  return {
    ...det,
    cx: clamp01(det.cx),
    cy: clamp01(det.cy),
    w: clamp01(det.w),
    h: clamp01(det.h),
    confidence: clamp01(det.confidence),
  }
}

export function serializeDetections(detections: Detection[]): string {
  const lines = detections.map(
    d =>
      `${d.category} ${d.label} ${d.confidence} ${d.cx} ${d.cy} ${d.w} ${d.h}`,
  )
  return lines.length ? lines.join('\n') + '\n' : ''
}
