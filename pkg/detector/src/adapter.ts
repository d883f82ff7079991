/**
 * Stub-weight detector: reads a weight file describing the boxes a
 * trained model would emit for its category and turns them into
 * interchange-format records. Real inference backends plug in by
 * producing the same StubWeights shape.
 */

import * as fs from 'fs'

import { CATEGORIES, Detection, LABELS, clampBox } from './format'

export type StubBox = {
  label: string
  confidence: number
  cx: number
  cy: number
  w: number
  h: number
}

export type StubWeights = {
  category: string
  boxes: StubBox[]
}

export class AdapterError extends Error {}

const IMAGE_MAGIC: Array<[string, number[]]> = [
  ['png', [0x89, 0x50, 0x4e, 0x47]],
  ['jpeg', [0xff, 0xd8, 0xff]],
  ['bmp', [0x42, 0x4d]],
]

export function checkImageReadable(imagePath: string): void {
  let header: Buffer
  try {
    const fd = fs.openSync(imagePath, 'r')
    header = Buffer.alloc(4)
    fs.readSync(fd, header, 0, 4, 0)
    fs.closeSync(fd)
  } catch (err) {
    throw new AdapterError(`cannot read image: ${imagePath}`)
  }
  const known = IMAGE_MAGIC.some(([, magic]) =>
    magic.every((byte, i) => header[i] === byte),
  )
  if (!known) {
    throw new AdapterError(`not a supported image file: ${imagePath}`)
  }
}

export function loadWeights(weightsPath: string): StubWeights {
  let raw: string
  try {
    raw = fs.readFileSync(weightsPath, 'utf-8')
  } catch (err) {
    throw new AdapterError(`missing weights: ${weightsPath}`)
  }
  let parsed: unknown
  try {
    parsed = JSON.parse(raw)
  } catch (err) {
    throw new AdapterError(`weights file is not valid JSON: ${weightsPath}`)
  }
  const weights = parsed as StubWeights
  if (typeof weights.category !== 'string' || !Array.isArray(weights.boxes)) {
    throw new AdapterError(
      `weights file needs "category" and "boxes": ${weightsPath}`,
    )
  }
  return weights
}

export type DetectOptions = {
  imagePath: string
  category: string
  weightsPath: string
  /** minimum confidence to keep a box (default 0: emit everything) */
  conf?: number
}

export function detect(options: DetectOptions): Detection[] {
  const { imagePath, category, weightsPath } = options
  const conf = options.conf ?? 0
  if (!CATEGORIES.includes(category)) {
    throw new AdapterError(`unknown category: ${category}`)
  }
  checkImageReadable(imagePath)
  const weights = loadWeights(weightsPath)
  if (weights.category !== category) {
    throw new AdapterError(
      `weights are for category ${weights.category}, asked for ${category}`,
    )
  }
  const known = LABELS[category]
  const detections: Detection[] = []
  for (const box of weights.boxes) {
    if (!known.includes(box.label)) {
      throw new AdapterError(
        `label ${box.label} does not belong to category ${category}`,
      )
    }
    if (box.confidence < conf) continue
    detections.push(clampBox({ category, ...box }))
  }
  return detections
}
