/**
 * Weight bundle loading. A bundle is a pair of files produced by
 * scripts/fetch_weights.py: <stem>.json (manifest) and <stem>.bin
 * (concatenated little-endian float32 tensors).
 *
 * Manifest layout:
 *   { "channels": 1|3,
 *     "tensors": [{ "name": "...", "shape": [kh,kw,in,out], "offset": n }] }
 * Offsets are element offsets into the .bin file.
 */

import * as fs from 'node:fs';
import * as tf from '@tensorflow/tfjs';
import { WeightMap, weightSpecs } from './model.js';

interface Manifest {
  channels: number;
  tensors: Array<{ name: string; shape: number[]; offset: number }>;
}

export function loadWeights(manifestPath: string): { channels: number; weights: WeightMap } {
  const manifest: Manifest = JSON.parse(fs.readFileSync(manifestPath, 'utf-8'));
  const binPath = manifestPath.replace(/\.json$/, '.bin');
  const raw = fs.readFileSync(binPath);
  const floats = new Float32Array(raw.buffer, raw.byteOffset, raw.byteLength / 4);

  const expected = new Map(weightSpecs(manifest.channels).map(s => [s.name, s.shape]));
  const weights: WeightMap = new Map();
  for (const t of manifest.tensors) {
    const shape = expected.get(t.name);
    if (!shape) throw new Error(`unexpected tensor ${t.name} in manifest`);
    if (shape.join(',') !== t.shape.join(',')) {
      throw new Error(`tensor ${t.name}: manifest shape [${t.shape}] != architecture [${shape}]`);
    }
    const n = t.shape.reduce((a, b) => a * b, 1);
    if (t.offset + n > floats.length) throw new Error(`tensor ${t.name} overruns weight file`);
    weights.set(t.name, tf.tensor(floats.slice(t.offset, t.offset + n),
      t.shape as [number, number, number, number]));
  }
  for (const name of expected.keys()) {
    if (!weights.has(name)) throw new Error(`manifest missing tensor ${name}`);
  }
  return { channels: manifest.channels, weights };
}
