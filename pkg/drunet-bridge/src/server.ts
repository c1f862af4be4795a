#!/usr/bin/env node
/**
 * PPDN/1 denoise server. Reads framed requests from stdin, runs the
 * bias-free residual U-Net, writes framed responses to stdout, and
 * exits when stdin closes. Single request in flight at a time.
 *
 * Usage:
 *   drunet-bridge --weights weights/drunet_gray.json
 *   drunet-bridge --random-weights --channels gray    (testing only)
 * Options:
 *   --fixed-sigma <v>   ignore the per-request sigma and use v
 */

import * as process from 'node:process';
import { Drunet, randomWeights } from './model.js';
import { cropToRecord, padReflectToMultiple } from './pad.js';
import { DOWNSCALE_FACTOR } from './model.js';
import {
  DenoiseRequest, ProtocolError, decodeRequest, encodeError, encodeSuccess,
  requestLength,
} from './protocol.js';
import { loadWeights } from './weights.js';

interface Options {
  weights?: string;
  randomWeights: boolean;
  channels: number;
  fixedSigma?: number;
}

function parseArgs(argv: string[]): Options {
  const opts: Options = { randomWeights: false, channels: 1 };
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case '--weights':
        opts.weights = argv[++i];
        break;
      case '--random-weights':
        opts.randomWeights = true;
        break;
      case '--channels': {
        const mode = argv[++i];
        if (mode !== 'gray' && mode !== 'color') {
          throw new Error(`--channels must be gray or color, got ${mode}`);
        }
        opts.channels = mode === 'gray' ? 1 : 3;
        break;
      }
      case '--fixed-sigma':
        opts.fixedSigma = Number(argv[++i]);
        break;
      default:
        throw new Error(`unknown option ${argv[i]}`);
    }
  }
  if (!opts.weights && !opts.randomWeights) {
    throw new Error('need --weights <manifest.json> or --random-weights');
  }
  return opts;
}

export function handleRequest(model: Drunet, req: DenoiseRequest, fixedSigma?: number): Buffer {
  if (req.channels !== model.channels) {
    return encodeError(2, `model expects ${model.channels} channel(s), got ${req.channels}`);
  }
  const sigma = fixedSigma ?? req.sigma;
  const padded = padReflectToMultiple(req.data, req.channels, req.height, req.width, DOWNSCALE_FACTOR);
  const denoised = model.forward(padded.data, padded.height, padded.width, sigma);
  const out = cropToRecord(denoised, req.channels, padded.height, padded.width, padded.crop);
  for (let i = 0; i < out.length; i++) {
    if (!Number.isFinite(out[i])) return encodeError(3, 'non-finite output sample');
  }
  return encodeSuccess(req, out);
}

function main(): void {
  let opts: Options;
  try {
    opts = parseArgs(process.argv.slice(2));
  } catch (err) {
    process.stderr.write(`${(err as Error).message}\n`);
    process.exit(2);
  }

  let model: Drunet;
  if (opts.randomWeights) {
    model = new Drunet(opts.channels, randomWeights(opts.channels));
  } else {
    const { channels, weights } = loadWeights(opts.weights!);
    model = new Drunet(channels, weights);
  }

  let pending: Buffer = Buffer.alloc(0);
  process.stdin.on('data', (chunk: Buffer) => {
    pending = pending.length === 0 ? chunk : Buffer.concat([pending, chunk]);
    for (;;) {
      // a stream with a bad magic can never resynchronize; report and quit
      if (pending.length >= 4 && pending.toString('latin1', 0, 4) !== 'PPDN') {
        process.stdout.write(encodeError(1, 'bad request magic'));
        process.exit(1);
      }
      const len = requestLength(pending);
      if (len < 0 || pending.length < len) return;
      let response: Buffer;
      try {
        response = handleRequest(model, decodeRequest(pending), opts.fixedSigma);
      } catch (err) {
        const status = err instanceof ProtocolError ? 1 : 4;
        response = encodeError(status, (err as Error).message);
      }
      process.stdout.write(response);
      pending = pending.subarray(len);
    }
  });
  process.stdin.on('end', () => process.exit(0));
}

const invokedDirectly = process.argv[1] && import.meta.url.endsWith(
  process.argv[1].split('/').pop()!);
if (invokedDirectly) main();
