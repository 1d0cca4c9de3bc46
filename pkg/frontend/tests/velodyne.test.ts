import { describe, expect, it } from "vitest";

import { decodeVelodyne, encodeVelodyne, pointCount } from "../src/velodyne.js";
import { makeFrame, mulberry32 } from "./helpers.js";

describe("velodyne codec", () => {
  it("round-trips bit-exactly, including negative zero", () => {
    const { points } = makeFrame(mulberry32(1));
    points[0] = -0;
    points[2] = -0;
    const encoded = encodeVelodyne(points);
    const back = decodeVelodyne(encoded);
    expect(Buffer.from(back.buffer)).toEqual(Buffer.from(encoded));
    expect(Object.is(back[0], -0)).toBe(true);
  });

  it("is zero-copy on encode", () => {
    const points = new Float32Array([1, 2, 3, 0.5]);
    const encoded = encodeVelodyne(points);
    points[0] = 9;
    expect(encoded.readFloatLE(0)).toBe(9);
  });

  it("rejects widths that are not quadruples", () => {
    expect(() => encodeVelodyne(new Float32Array(9))).toThrow(/multiple of 4/);
    expect(() => decodeVelodyne(Buffer.alloc(17))).toThrow(/multiple of 16/);
  });

  it("counts points", () => {
    expect(pointCount(new Float32Array(8))).toBe(2);
  });

  it("decodes empty payloads", () => {
    expect(decodeVelodyne(Buffer.alloc(0)).length).toBe(0);
  });
});
