import { once } from "node:events";
import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";
import path from "node:path";
import readline from "node:readline";
import { fileURLToPath } from "node:url";

import { afterAll, describe, expect, it } from "vitest";

const MAIN = path.join(
  path.dirname(fileURLToPath(import.meta.url)),
  "..",
  "dist",
  "main.js"
);

class Client {
  private readonly child: ChildProcessWithoutNullStreams;
  private readonly lines: AsyncIterator<string>;

  constructor(args: string[] = []) {
    this.child = spawn(process.execPath, [MAIN, ...args], {
      stdio: ["pipe", "pipe", "inherit"],
    });
    const rl = readline.createInterface({ input: this.child.stdout });
    this.lines = rl[Symbol.asyncIterator]();
  }

  async send(request: unknown): Promise<Record<string, unknown>> {
    this.child.stdin.write(`${JSON.stringify(request)}\n`);
    const next = await this.lines.next();
    if (next.done) throw new Error("evaluator closed stdout");
    return JSON.parse(next.value);
  }

  async sendRaw(line: string): Promise<Record<string, unknown>> {
    this.child.stdin.write(`${line}\n`);
    const next = await this.lines.next();
    if (next.done) throw new Error("evaluator closed stdout");
    return JSON.parse(next.value);
  }

  async shutdown(): Promise<void> {
    try {
      await this.send({ cmd: "shutdown" });
    } catch {
      // already gone
    }
    this.child.stdin.end();
    if (this.child.exitCode === null) await once(this.child, "exit");
  }

  kill(): void {
    this.child.kill();
  }
}

const clients: Client[] = [];

function connect(args: string[] = []): Client {
  const client = new Client(args);
  clients.push(client);
  return client;
}

afterAll(() => {
  for (const client of clients) client.kill();
});

async function scriptedRun(client: Client): Promise<number[]> {
  const hello = await client.send({ cmd: "hello", version: 1 });
  expect(hello.ok).toBe(true);

  const fitnesses: number[] = [];
  let state = "root";
  for (let round = 0; round < 3; round++) {
    for (const codes of [
      [20, 0, 6, 14, 1, 5],
      [8, 2, 3, 25, 1, 9],
    ]) {
      const reply = await client.send({
        cmd: "evaluate",
        segment: 1,
        codes,
        state,
        blocks: [0, 1],
      });
      expect(reply.ok).toBe(true);
      fitnesses.push(reply.fitness as number);
    }
    const moved = await client.send({
      cmd: "propagate",
      segment: 1,
      codes: [20, 0, 6],
      state: "root",
      blocks: [0, 0],
    });
    expect(moved.ok).toBe(true);
    state = moved.state as string;
  }
  const full = await client.send({
    cmd: "evaluate",
    segment: 0,
    codes: [20, 0, 6, 14, 1, 5, 8, 2, 3, 25, 1, 9],
    state: "root",
    blocks: [0, 3],
  });
  expect(full.ok).toBe(true);
  expect(full.cost).toBe(1);
  fitnesses.push(full.fitness as number);
  return fitnesses;
}

describe("served process", () => {
  it("answers a scripted session and repeats it identically", async () => {
    const first = connect(["--seed", "5"]);
    const second = connect(["--seed", "5"]);
    const a = await scriptedRun(first);
    const b = await scriptedRun(second);
    expect(a).toEqual(b);
    await first.shutdown();
    await second.shutdown();
  }, 60000);

  it("survives malformed input mid-session", async () => {
    const client = connect();
    const hello = await client.send({ cmd: "hello", version: 1 });
    expect(hello.ok).toBe(true);
    const broken = await client.sendRaw("this is not json");
    expect(broken.ok).toBe(false);
    const after = await client.send({
      cmd: "evaluate",
      segment: 1,
      codes: [20, 0, 6, 14, 1, 5],
      state: "root",
      blocks: [0, 1],
    });
    expect(after.ok).toBe(true);
    await client.shutdown();
  }, 30000);
});
