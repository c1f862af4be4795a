/**
 * Bias-free residual U-Net denoiser.
 *
 * Input is the noisy image plus one constant noise-level channel. Four
 * scales with channel widths 64/128/256/512; each scale has four
 * residual blocks (conv-relu-conv with an identity skip, the only
 * nonlinearity in the block), 2x2 stride-2 convolutions downward and
 * 2x2 stride-2 transposed convolutions upward, identity skip
 * connections across scales, and no bias anywhere. Because every
 * operation is positively homogeneous, the network is scaling
 * equivariant: forward(a*x, a*sigma) = a*forward(x, sigma).
 */

import * as tf from '@tensorflow/tfjs';

export const SCALE_WIDTHS = [64, 128, 256, 512];
export const BLOCKS_PER_SCALE = 4;
export const DOWNSCALE_FACTOR = 8; // three 2x downsamplings

export type WeightMap = Map<string, tf.Tensor4D>;

/** Canonical weight names with tfjs shapes ([kh,kw,in,out]; transposed convs [kh,kw,out,in]). */
export function weightSpecs(channels: number): Array<{ name: string; shape: number[] }> {
  const [w1, w2, w3, w4] = SCALE_WIDTHS;
  const specs: Array<{ name: string; shape: number[] }> = [];
  const res = (prefix: string, width: number) => {
    for (let b = 0; b < BLOCKS_PER_SCALE; b++) {
      specs.push({ name: `${prefix}.block${b}.conv1`, shape: [3, 3, width, width] });
      specs.push({ name: `${prefix}.block${b}.conv2`, shape: [3, 3, width, width] });
    }
  };
  specs.push({ name: 'head', shape: [3, 3, channels + 1, w1] });
  res('down1', w1);
  specs.push({ name: 'down1.down', shape: [2, 2, w1, w2] });
  res('down2', w2);
  specs.push({ name: 'down2.down', shape: [2, 2, w2, w3] });
  res('down3', w3);
  specs.push({ name: 'down3.down', shape: [2, 2, w3, w4] });
  res('body', w4);
  specs.push({ name: 'up3.up', shape: [2, 2, w3, w4] });
  res('up3', w3);
  specs.push({ name: 'up2.up', shape: [2, 2, w2, w3] });
  res('up2', w2);
  specs.push({ name: 'up1.up', shape: [2, 2, w1, w2] });
  res('up1', w1);
  specs.push({ name: 'tail', shape: [3, 3, w1, channels] });
  return specs;
}

export function randomWeights(channels: number, stddev = 0.01): WeightMap {
  const map: WeightMap = new Map();
  for (const { name, shape } of weightSpecs(channels)) {
    map.set(name, tf.randomNormal(shape as [number, number, number, number], 0, stddev));
  }
  return map;
}

export class Drunet {
  constructor(readonly channels: number, readonly weights: WeightMap) {
    for (const { name, shape } of weightSpecs(channels)) {
      const w = weights.get(name);
      if (!w) throw new Error(`missing weight tensor ${name}`);
      if (w.shape.join(',') !== shape.join(',')) {
        throw new Error(`weight ${name} has shape [${w.shape}], expected [${shape}]`);
      }
    }
  }

  private conv(x: tf.Tensor4D, name: string, stride: 1 | 2): tf.Tensor4D {
    return tf.conv2d(x, this.weights.get(name)!, stride, 'same');
  }

  private deconv(x: tf.Tensor4D, name: string): tf.Tensor4D {
    const w = this.weights.get(name)!;
    const [, h, wd] = [x.shape[0], x.shape[1], x.shape[2]];
    const outShape: [number, number, number, number] = [1, h * 2, wd * 2, w.shape[2]];
    return tf.conv2dTranspose(x, w, outShape, 2, 'same');
  }

  private resChain(x: tf.Tensor4D, prefix: string): tf.Tensor4D {
    let out = x;
    for (let b = 0; b < BLOCKS_PER_SCALE; b++) {
      const inner = this.conv(
        tf.relu(this.conv(out, `${prefix}.block${b}.conv1`, 1)),
        `${prefix}.block${b}.conv2`, 1);
      out = tf.add(out, inner);
    }
    return out;
  }

  /**
   * Denoise one planar image. `data` holds channels*height*width floats;
   * dimensions must divide DOWNSCALE_FACTOR (pad first).
   */
  forward(data: Float32Array, height: number, width: number, sigma: number): Float32Array {
    if (height % DOWNSCALE_FACTOR !== 0 || width % DOWNSCALE_FACTOR !== 0) {
      throw new Error(`dimensions ${height}x${width} not divisible by ${DOWNSCALE_FACTOR}`);
    }
    const result = tf.tidy(() => {
      const planar = tf.tensor(data, [1, this.channels, height, width]);
      const noiseMap = tf.fill([1, 1, height, width], sigma);
      const x0 = tf.transpose(tf.concat([planar, noiseMap], 1), [0, 2, 3, 1]) as tf.Tensor4D;

      const x1 = this.conv(x0, 'head', 1);
      const x2 = this.conv(this.resChain(x1, 'down1'), 'down1.down', 2);
      const x3 = this.conv(this.resChain(x2, 'down2'), 'down2.down', 2);
      const x4 = this.conv(this.resChain(x3, 'down3'), 'down3.down', 2);
      let x = this.resChain(x4, 'body');
      x = this.resChain(this.deconv(tf.add(x, x4), 'up3.up'), 'up3');
      x = this.resChain(this.deconv(tf.add(x, x3), 'up2.up'), 'up2');
      x = this.resChain(this.deconv(tf.add(x, x2), 'up1.up'), 'up1');
      const y = this.conv(tf.add(x, x1), 'tail', 1);
      return tf.transpose(y, [0, 3, 1, 2]);
    });
    const out = result.dataSync() as Float32Array;
    result.dispose();
    return new Float32Array(out);
  }

  dispose(): void {
    for (const w of this.weights.values()) w.dispose();
  }
}
