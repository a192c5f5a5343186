#!/usr/bin/env node
/** Serve the segment evaluator over stdin/stdout, one JSON object per line.
 *
 * Usage: node dist/main.js [--seed N]
 * The seed feeds every training run's RNG derivation, so two processes
 * launched with the same seed answer identical request streams identically.
 */

import readline from "node:readline";

import { Session, respondToLine } from "./protocol.js";

function parseSeed(argv: string[]): number {
  const at = argv.indexOf("--seed");
  if (at >= 0 && argv[at + 1] !== undefined) {
    const value = Number(argv[at + 1]);
    if (Number.isFinite(value)) return Math.trunc(value);
  }
  return 0;
}

async function main(): Promise<void> {
  const session = new Session(parseSeed(process.argv.slice(2)));
  const rl = readline.createInterface({
    input: process.stdin,
    crlfDelay: Number.POSITIVE_INFINITY,
  });
  for await (const line of rl) {
    const reply = respondToLine(session, String(line));
    if (reply === null) continue;
    process.stdout.write(`${JSON.stringify(reply)}\n`);
    if (session.closed) break;
  }
}

main().catch((error) => {
  console.error("segment-eval fatal:", error);
  process.exit(1);
});
