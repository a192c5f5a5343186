import { describe, expect, it } from "vitest";

import {
  DIMS_PER_BLOCK,
  N_BLOCKS,
  PROTOCOL_VERSION,
  Session,
  respondToLine,
} from "../src/protocol.js";

const CODES_2_BLOCKS = [20, 0, 6, 14, 1, 5];

function evaluateRequest(over: Record<string, unknown> = {}) {
  return {
    cmd: "evaluate",
    segment: 1,
    codes: CODES_2_BLOCKS,
    state: "root",
    blocks: [0, 1],
    ...over,
  };
}

describe("handshake", () => {
  it("declares the chain shape", () => {
    const reply = new Session().handle({ cmd: "hello", version: PROTOCOL_VERSION });
    expect(reply).toEqual({
      ok: true,
      version: PROTOCOL_VERSION,
      n_blocks: N_BLOCKS,
      dims_per_block: DIMS_PER_BLOCK,
    });
  });

  it("rejects other protocol versions", () => {
    const reply = new Session().handle({ cmd: "hello", version: 99 });
    expect(reply.ok).toBe(false);
    expect(String(reply.error)).toContain("version");
  });
});

describe("evaluate", () => {
  it("returns a fitness in [0, 1] and the block-proportional cost", () => {
    const reply = new Session().handle(evaluateRequest());
    expect(reply.ok).toBe(true);
    expect(reply.fitness).toBeGreaterThanOrEqual(0);
    expect(reply.fitness).toBeLessThanOrEqual(1);
    expect(reply.cost).toBe(2 / N_BLOCKS);
  });

  it("answers identical requests identically", () => {
    const session = new Session(3);
    const a = session.handle(evaluateRequest());
    const b = session.handle(evaluateRequest());
    expect(a).toEqual(b);
    const fresh = new Session(3).handle(evaluateRequest());
    expect(fresh).toEqual(a);
  });

  it("rejects misaligned codes, bad ranges and unknown states", () => {
    const session = new Session();
    const short = session.handle(evaluateRequest({ codes: [20, 0, 6] }));
    expect(short.ok).toBe(false);
    expect(String(short.error)).toContain("expected 6 codes");

    const outside = session.handle(evaluateRequest({ codes: [99, 0, 6, 14, 1, 5] }));
    expect(outside.ok).toBe(false);
    expect(String(outside.error)).toContain("outside");

    const badBlocks = session.handle(evaluateRequest({ blocks: [2, 9] }));
    expect(badBlocks.ok).toBe(false);

    const stale = session.handle(evaluateRequest({ state: "s999" }));
    expect(stale.ok).toBe(false);
    expect(String(stale.error)).toMatch(/^stale-state/);
  });
});

describe("propagate", () => {
  it("registers fresh non-colliding state ids usable downstream", () => {
    const session = new Session();
    const first = session.handle({
      cmd: "propagate",
      segment: 1,
      codes: [20, 0, 6],
      state: "root",
      blocks: [0, 0],
    });
    expect(first.ok).toBe(true);
    expect(first.state).toBe("s1");

    const second = session.handle({
      cmd: "propagate",
      segment: 1,
      codes: [20, 0, 6],
      state: "root",
      blocks: [0, 0],
    });
    expect(second.state).toBe("s2");
    expect(second.state).not.toBe(first.state);

    const downstream = session.handle(
      evaluateRequest({ segment: 2, state: first.state, blocks: [1, 2] })
    );
    expect(downstream.ok).toBe(true);
  });
});

describe("request loop hygiene", () => {
  it("answers malformed lines with an error and keeps serving", () => {
    const session = new Session();
    const garbage = respondToLine(session, "{nope");
    expect(garbage).not.toBeNull();
    expect(garbage!.ok).toBe(false);
    expect(String(garbage!.error)).toContain("malformed");

    expect(respondToLine(session, "")).toBeNull();
    expect(respondToLine(session, "[1,2,3]")!.ok).toBe(false);
    expect(respondToLine(session, '{"cmd":"warble"}')!.ok).toBe(false);

    const afterwards = respondToLine(session, JSON.stringify(evaluateRequest()));
    expect(afterwards!.ok).toBe(true);
  });

  it("acknowledges shutdown and marks the session closed", () => {
    const session = new Session();
    expect(session.handle({ cmd: "shutdown" })).toEqual({ ok: true });
    expect(session.closed).toBe(true);
  });
});
