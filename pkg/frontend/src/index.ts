export { bindAugment, bindAugmentBatch } from "./bind.js";
export type { AugmentOptions, FramePayload } from "./bind.js";
export { formatG9, formatLabels, parseLabels } from "./labels.js";
export type { LabelRecord } from "./labels.js";
export { decodeVelodyne, encodeVelodyne, pointCount } from "./velodyne.js";
export { cliCommand, runCli } from "./cli.js";
