#!/usr/bin/env node
/**
 * CLI: `detect <image> --category CAT --weights PATH [--conf V]`
 * Emits interchange-format records on standard output; exits nonzero
 * on missing weights, unreadable images, or unknown categories.
 */

import { AdapterError, detect } from './adapter'
import { serializeDetections } from './format'

const USAGE =
  'usage: detect <image> --category CAT --weights PATH [--conf V]'

export type CliArgs = {
  imagePath: string
  category: string
  weightsPath: string
  conf: number
}

export function parseArgs(argv: string[]): CliArgs {
  // accept both `detect <image> ...` and a bare `<image> ...`
  const rest = argv[0] === 'detect' ? argv.slice(1) : argv.slice()
  if (rest.length === 0) {
    throw new AdapterError(USAGE)
  }
  let imagePath: string | undefined
  let category: string | undefined
  let weightsPath: string | undefined
  let conf = 0
  for (let i = 0; i < rest.length; i++) {
    const arg = rest[i]
    if (arg === '--category') {
      category = rest[++i]
    } else if (arg === '--weights') {
      weightsPath = rest[++i]
    } else if (arg === '--conf') {
      conf = Number(rest[++i])
      if (!Number.isFinite(conf)) {
        throw new AdapterError(`--conf needs a number, got ${rest[i]}`)
      }
    } else if (arg.startsWith('--')) {
      throw new AdapterError(`unknown option ${arg}\n${USAGE}`)
    } else if (imagePath === undefined) {
      imagePath = arg
    } else {
      throw new AdapterError(`unexpected argument ${arg}\n${USAGE}`)
    }
  }
  if (!imagePath || !category || !weightsPath) {
    throw new AdapterError(USAGE)
  }
  return { imagePath, category, weightsPath, conf }
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv)
    const detections = detect(args)
    process.stdout.write(serializeDetections(detections))
    return 0
  } catch (err) {
    const message = err instanceof Error ? err.message : String(err)
    process.stderr.write(`detect: ${message}\n`)
    return err instanceof AdapterError ? 2 : 1
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)))
}
