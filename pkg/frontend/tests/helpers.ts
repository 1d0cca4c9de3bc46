import type { FramePayload } from "../src/bind.js";
import type { LabelRecord } from "../src/labels.js";

/** Small deterministic PRNG so fixtures are reproducible across runs. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

const uniform = (rand: () => number, lo: number, hi: number) => lo + (hi - lo) * rand();

/** A road-like synthetic frame: ground plane plus a couple of car clusters. */
export function makeFrame(rand: () => number, nGround = 600, nCars = 2): FramePayload {
  const labels: LabelRecord[] = [];
  const perCar = 60;
  const points = new Float32Array((nGround + nCars * perCar) * 4);
  let w = 0;
  for (let i = 0; i < nGround; i++) {
    points[w++] = uniform(rand, 2, 70);
    points[w++] = uniform(rand, -38, 38);
    points[w++] = -1.73 + uniform(rand, -0.02, 0.02);
    points[w++] = uniform(rand, 0.1, 0.9);
  }
  for (let c = 0; c < nCars; c++) {
    const cx = uniform(rand, 8, 55);
    const cy = uniform(rand, -25, 25);
    const cz = -0.9;
    const theta = uniform(rand, -Math.PI, Math.PI);
    const cos = Math.cos(theta);
    const sin = Math.sin(theta);
    for (let i = 0; i < perCar; i++) {
      const lx = uniform(rand, -1.9, 1.9);
      const ly = uniform(rand, -0.8, 0.8);
      const lz = uniform(rand, -0.7, 0.7);
      points[w++] = cos * lx - sin * ly + cx;
      points[w++] = sin * lx + cos * ly + cy;
      points[w++] = lz + cz;
      points[w++] = uniform(rand, 0.1, 0.9);
    }
    labels.push({ label: "Car", cx, cy, cz, l: 3.9, w: 1.7, h: 1.5, theta });
  }
  return { points, labels };
}
