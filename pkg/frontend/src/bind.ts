/**
 * Array-in, array-out augmentation for dataloaders.
 *
 * Frames are staged as velodyne/label files in a temporary directory, one
 * `drcpo augment` run processes them, and the outputs are decoded back
 * into typed arrays. The database lives inside that one CLI process, so
 * batching many frames per call amortizes its load; prefer
 * `bindAugmentBatch` inside training loops.
 */

import { mkdtempSync, mkdirSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { runCli } from "./cli.js";
import { formatLabels, LabelRecord, parseLabels } from "./labels.js";
import { assertPointArray, decodeVelodyne, encodeVelodyne } from "./velodyne.js";

export interface FramePayload {
  /** flat x,y,z,r float32 quadruples */
  points: Float32Array;
  labels: LabelRecord[];
}

export interface AugmentOptions {
  /** ground-truth database file; required for cda/drcpo configs */
  dbPath?: string;
  /** pipeline config file; CLI defaults apply when omitted */
  configPath?: string;
  /** master seed; frames derive their own stream from it */
  seed: number;
}

export function bindAugmentBatch(
  frames: Record<string, FramePayload>,
  options: AugmentOptions,
): Record<string, FramePayload> {
  const ids = Object.keys(frames);
  if (ids.length === 0) return {};
  for (const id of ids) {
    assertPointArray(frames[id].points);
  }
  const work = mkdtempSync(join(tmpdir(), "drcpo-bind-"));
  try {
    const inDir = join(work, "in");
    const outDir = join(work, "out");
    mkdirSync(inDir);
    for (const id of ids) {
      writeFileSync(join(inDir, `${id}.bin`), encodeVelodyne(frames[id].points));
      writeFileSync(join(inDir, `${id}.txt`), formatLabels(frames[id].labels));
    }
    const args = [
      "augment",
      "--frames", inDir,
      "--out", outDir,
      "--seed", String(options.seed),
    ];
    if (options.dbPath) args.push("--db", options.dbPath);
    if (options.configPath) args.push("--config", options.configPath);
    runCli(args);
    const result: Record<string, FramePayload> = {};
    for (const id of ids) {
      result[id] = {
        points: decodeVelodyne(readFileSync(join(outDir, `${id}.bin`))),
        labels: parseLabels(readFileSync(join(outDir, `${id}.txt`), "utf-8")),
      };
    }
    return result;
  } finally {
    rmSync(work, { recursive: true, force: true });
  }
}

export function bindAugment(
  points: Float32Array,
  labels: LabelRecord[],
  options: AugmentOptions & { frameId?: string },
): FramePayload {
  const frameId = options.frameId ?? "frame";
  const out = bindAugmentBatch({ [frameId]: { points, labels } }, options);
  return out[frameId];
}
