/**
 * Velodyne binary codec: packed little-endian float32 quadruples
 * (x, y, z, intensity), no header. Encoding is zero-copy over the typed
 * array's buffer; decoding copies once into an aligned Float32Array.
 */

export const FLOATS_PER_POINT = 4;

/** Validate and view a flat (N*4) float32 point array. */
export function assertPointArray(points: Float32Array): void {
  if (points.length % FLOATS_PER_POINT !== 0) {
    throw new Error(
      `point array length ${points.length} is not a multiple of ${FLOATS_PER_POINT}; expected flat x,y,z,r quadruples`,
    );
  }
}

/** Zero-copy Buffer over the point array's storage. */
export function encodeVelodyne(points: Float32Array): Buffer {
  assertPointArray(points);
  return Buffer.from(points.buffer, points.byteOffset, points.byteLength);
}

/** Decode a velodyne payload into a fresh, aligned Float32Array. */
export function decodeVelodyne(data: Buffer): Float32Array {
  if (data.byteLength % (FLOATS_PER_POINT * 4) !== 0) {
    throw new Error(`velodyne payload of ${data.byteLength} bytes is not a multiple of 16`);
  }
  const copy = data.buffer.slice(data.byteOffset, data.byteOffset + data.byteLength);
  return new Float32Array(copy);
}

export function pointCount(points: Float32Array): number {
  assertPointArray(points);
  return points.length / FLOATS_PER_POINT;
}
