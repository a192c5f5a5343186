/** Request validation and dispatch for the line-delimited JSON protocol.
 *
 * One session owns the dataset, the propagated-state registry, and the
 * base seed. Every request is answered with a single JSON object:
 * {"ok": true, ...} on success, {"ok": false, "error": "..."} otherwise.
 * Unknown or malformed requests are reported, never fatal; stale state
 * handles are flagged with the "stale-state" error prefix the engine
 * distinguishes from protocol failures.
 */

import { Dataset, buildDataset } from "./dataset.js";
import { StageConfig, decodeStage, trainSegment } from "./nn.js";
import { fnv1a } from "./rng.js";

export const PROTOCOL_VERSION = 1;
export const N_BLOCKS = 4;
export const DIMS_PER_BLOCK = [3, 3, 3, 3];
export const ROOT_STATE = "root";

const CODE_BOUNDS: Array<[number, number]> = [
  [0, 28], // hidden units 4..32
  [0, 2], // activation kind
  [0, 10], // learning-rate code
];

interface StatePayload {
  trainX: number[][];
  valX: number[][];
}

interface Job {
  segment: number;
  first: number;
  last: number;
  codes: number[];
  state: StatePayload;
}

function fail(message: string): Record<string, unknown> {
  return { ok: false, error: message };
}

export class Session {
  private readonly data: Dataset;
  private readonly states = new Map<string, StatePayload>();
  private readonly baseSeed: number;
  private stateCounter = 0;
  closed = false;

  constructor(baseSeed = 0) {
    this.baseSeed = baseSeed >>> 0;
    this.data = buildDataset();
    this.states.set(ROOT_STATE, {
      trainX: this.data.trainX,
      valX: this.data.valX,
    });
  }

  handle(request: unknown): Record<string, unknown> {
    if (typeof request !== "object" || request === null || Array.isArray(request)) {
      return fail("request must be a JSON object");
    }
    const cmd = (request as Record<string, unknown>).cmd;
    try {
      switch (cmd) {
        case "hello":
          return this.hello(request as Record<string, unknown>);
        case "evaluate":
          return this.evaluate(request as Record<string, unknown>);
        case "propagate":
          return this.propagate(request as Record<string, unknown>);
        case "shutdown":
          this.closed = true;
          return { ok: true };
        default:
          return fail(`unknown command ${JSON.stringify(cmd)}`);
      }
    } catch (error) {
      return fail(error instanceof Error ? error.message : String(error));
    }
  }

  private hello(req: Record<string, unknown>): Record<string, unknown> {
    if (req.version !== PROTOCOL_VERSION) {
      return fail(
        `unsupported protocol version ${JSON.stringify(req.version)}, ` +
          `this evaluator speaks ${PROTOCOL_VERSION}`
      );
    }
    return {
      ok: true,
      version: PROTOCOL_VERSION,
      n_blocks: N_BLOCKS,
      dims_per_block: DIMS_PER_BLOCK,
    };
  }

  private job(req: Record<string, unknown>): Job {
    const segment = req.segment;
    if (typeof segment !== "number" || !Number.isInteger(segment) || segment < 0) {
      throw new Error(`invalid segment ${JSON.stringify(segment)}`);
    }
    const blocks = req.blocks;
    if (
      !Array.isArray(blocks) ||
      blocks.length !== 2 ||
      !blocks.every((b) => typeof b === "number" && Number.isInteger(b))
    ) {
      throw new Error(`blocks must be [first, last], got ${JSON.stringify(blocks)}`);
    }
    const [first, last] = blocks as [number, number];
    if (first < 0 || last >= N_BLOCKS || first > last) {
      throw new Error(`block range [${first}, ${last}] is outside the ${N_BLOCKS}-block chain`);
    }
    const codes = req.codes;
    if (!Array.isArray(codes) || !codes.every((c) => typeof c === "number" && Number.isInteger(c))) {
      throw new Error(`codes must be an integer array, got ${JSON.stringify(codes)}`);
    }
    const expected = (last - first + 1) * DIMS_PER_BLOCK[0];
    if (codes.length !== expected) {
      throw new Error(
        `expected ${expected} codes for blocks [${first}, ${last}], got ${codes.length}`
      );
    }
    for (let i = 0; i < codes.length; i++) {
      const [lo, hi] = CODE_BOUNDS[i % CODE_BOUNDS.length];
      if (codes[i] < lo || codes[i] > hi) {
        throw new Error(`code ${codes[i]} at position ${i} outside [${lo}, ${hi}]`);
      }
    }
    const handle = req.state;
    if (typeof handle !== "string") {
      throw new Error(`state must be a string handle, got ${JSON.stringify(handle)}`);
    }
    const state = this.states.get(handle);
    if (!state) {
      throw new Error(`stale-state: unknown state id ${JSON.stringify(handle)}`);
    }
    return { segment, first, last, codes: codes as number[], state };
  }

  private stageConfigs(codes: number[]): StageConfig[] {
    const configs: StageConfig[] = [];
    for (let i = 0; i < codes.length; i += 3) {
      configs.push(decodeStage(codes.slice(i, i + 3)));
    }
    return configs;
  }

  private jobSeed(job: Job): number {
    return fnv1a(
      `${this.baseSeed}|${job.segment}|${job.first}-${job.last}|${job.codes.join(",")}`
    );
  }

  private evaluate(req: Record<string, unknown>): Record<string, unknown> {
    const job = this.job(req);
    const result = trainSegment(
      this.stageConfigs(job.codes),
      job.state.trainX,
      this.data.trainY,
      job.state.valX,
      this.data.valY,
      this.jobSeed(job)
    );
    return {
      ok: true,
      fitness: result.fitness,
      cost: (job.last - job.first + 1) / N_BLOCKS,
    };
  }

  private propagate(req: Record<string, unknown>): Record<string, unknown> {
    const job = this.job(req);
    // retraining with the job seed reproduces exactly the stages the
    // matching evaluate call scored, without caching nets across requests
    const result = trainSegment(
      this.stageConfigs(job.codes),
      job.state.trainX,
      this.data.trainY,
      job.state.valX,
      this.data.valY,
      this.jobSeed(job)
    );
    const id = `s${++this.stateCounter}`;
    this.states.set(id, {
      trainX: job.state.trainX.map((x) => result.net.transform(x)),
      valX: job.state.valX.map((x) => result.net.transform(x)),
    });
    return { ok: true, state: id };
  }
}

/** One stdin line in, one reply object out; null for blank lines. */
export function respondToLine(
  session: Session,
  line: string
): Record<string, unknown> | null {
  const trimmed = line.trim();
  if (!trimmed) return null;
  let parsed: unknown;
  try {
    parsed = JSON.parse(trimmed);
  } catch {
    const shown = trimmed.length > 80 ? `${trimmed.slice(0, 80)}...` : trimmed;
    return fail(`malformed request line: ${shown}`);
  }
  return session.handle(parsed);
}
