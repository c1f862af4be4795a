/**
 * PPDN/1 wire protocol: binary denoise requests over stdin/stdout.
 *
 * Request:  "PPDN" | u32 version=1 | u32 C | u32 H | u32 W | f32 sigma
 *           | C*H*W f32 samples, planar channel-major, all little-endian.
 * Response: "PPDR" | u32 status. status=0 is followed by the same
 *           C/H/W/sigma header and payload; any other status by
 *           u32 message-length and a UTF-8 message.
 */

export const REQUEST_MAGIC = 'PPDN';
export const RESPONSE_MAGIC = 'PPDR';
export const PROTOCOL_VERSION = 1;
export const HEADER_BYTES = 4 + 4 * 4 + 4;

export interface DenoiseRequest {
  channels: number;
  height: number;
  width: number;
  sigma: number;
  data: Float32Array; // length channels*height*width, planar
}

export class ProtocolError extends Error {}

/** Bytes needed for the complete request starting at the buffer head, or -1. */
export function requestLength(buf: Buffer): number {
  if (buf.length < HEADER_BYTES) return -1;
  const c = buf.readUInt32LE(8);
  const h = buf.readUInt32LE(12);
  const w = buf.readUInt32LE(16);
  return HEADER_BYTES + c * h * w * 4;
}

export function decodeRequest(buf: Buffer): DenoiseRequest {
  if (buf.toString('latin1', 0, 4) !== REQUEST_MAGIC) {
    throw new ProtocolError(`bad request magic ${buf.subarray(0, 4).toString('hex')}`);
  }
  const version = buf.readUInt32LE(4);
  if (version !== PROTOCOL_VERSION) {
    throw new ProtocolError(`unsupported protocol version ${version}`);
  }
  const channels = buf.readUInt32LE(8);
  const height = buf.readUInt32LE(12);
  const width = buf.readUInt32LE(16);
  const sigma = buf.readFloatLE(20);
  if (channels !== 1 && channels !== 3) {
    throw new ProtocolError(`unsupported channel count ${channels}`);
  }
  if (height === 0 || width === 0) {
    throw new ProtocolError('empty image');
  }
  if (!(sigma >= 0)) {
    throw new ProtocolError(`invalid sigma ${sigma}`);
  }
  const n = channels * height * width;
  if (buf.length < HEADER_BYTES + n * 4) {
    throw new ProtocolError('truncated payload');
  }
  // copy so the view survives the caller recycling its buffer
  const data = new Float32Array(n);
  for (let i = 0; i < n; i++) data[i] = buf.readFloatLE(HEADER_BYTES + i * 4);
  return { channels, height, width, sigma, data };
}

export function encodeSuccess(req: DenoiseRequest, data: Float32Array): Buffer {
  const n = req.channels * req.height * req.width;
  if (data.length !== n) {
    throw new ProtocolError(`payload length ${data.length}, expected ${n}`);
  }
  // magic + status + C/H/W/sigma echo + payload
  const out = Buffer.alloc(4 + 4 + 16 + n * 4);
  out.write(RESPONSE_MAGIC, 0, 'latin1');
  out.writeUInt32LE(0, 4); // status ok
  out.writeUInt32LE(req.channels, 8);
  out.writeUInt32LE(req.height, 12);
  out.writeUInt32LE(req.width, 16);
  out.writeFloatLE(req.sigma, 20);
  for (let i = 0; i < n; i++) out.writeFloatLE(data[i], 24 + i * 4);
  return out;
}

export function encodeError(status: number, message: string): Buffer {
  if (status === 0) throw new ProtocolError('error status must be nonzero');
  const msg = Buffer.from(message, 'utf-8');
  const out = Buffer.alloc(4 + 4 + 4 + msg.length);
  out.write(RESPONSE_MAGIC, 0, 'latin1');
  out.writeUInt32LE(status, 4);
  out.writeUInt32LE(msg.length, 8);
  msg.copy(out, 12);
  return out;
}
