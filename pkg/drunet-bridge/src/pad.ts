/**
 * Reflect-pad planar images so height and width divide the network's
 * total downscaling factor, and crop responses back afterwards.
 */

export interface CropRecord {
  height: number;
  width: number;
}

export interface Padded {
  data: Float32Array; // channels * padH * padW, planar
  height: number;
  width: number;
  crop: CropRecord;
}

function nextMultiple(n: number, m: number): number {
  return Math.ceil(n / m) * m;
}

/** Reflection index (edge not repeated), matching numpy's "reflect" mode. */
function reflect(i: number, n: number): number {
  if (n === 1) return 0;
  const period = 2 * (n - 1);
  let j = i % period;
  if (j < 0) j += period;
  return j < n ? j : period - j;
}

export function padReflectToMultiple(
  data: Float32Array, channels: number, height: number, width: number, m: number,
): Padded {
  const ph = nextMultiple(height, m);
  const pw = nextMultiple(width, m);
  if (ph === height && pw === width) {
    return { data, height, width, crop: { height, width } };
  }
  const out = new Float32Array(channels * ph * pw);
  for (let c = 0; c < channels; c++) {
    for (let i = 0; i < ph; i++) {
      const si = reflect(i, height);
      for (let j = 0; j < pw; j++) {
        out[(c * ph + i) * pw + j] = data[(c * height + si) * width + reflect(j, width)];
      }
    }
  }
  return { data: out, height: ph, width: pw, crop: { height, width } };
}

export function cropToRecord(
  data: Float32Array, channels: number, height: number, width: number, crop: CropRecord,
): Float32Array {
  if (height === crop.height && width === crop.width) return data;
  const out = new Float32Array(channels * crop.height * crop.width);
  for (let c = 0; c < channels; c++) {
    for (let i = 0; i < crop.height; i++) {
      for (let j = 0; j < crop.width; j++) {
        out[(c * crop.height + i) * crop.width + j] = data[(c * height + i) * width + j];
      }
    }
  }
  return out;
}
