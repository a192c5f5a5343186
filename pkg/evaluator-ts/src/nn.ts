/** Tiny fully-connected stages trained with plain SGD.
 *
 * Each chain block contributes one dense stage, decoded from its three
 * codes (hidden units, activation kind, learning rate). A disposable
 * softmax head is attached for scoring; the reported fitness is the best
 * validation accuracy seen across the training epochs. Everything is
 * deterministic for a given (stage configs, inputs, seed).
 */

import { N_CLASSES } from "./dataset.js";
import { Rng, mulberry32, shuffleInPlace } from "./rng.js";

export const EPOCHS = 5;
const BATCH_SIZE = 16;
const HEAD_LR = 0.05;

export type ActivationKind = "relu" | "tanh" | "sigmoid";
export const ACTIVATIONS: ActivationKind[] = ["relu", "tanh", "sigmoid"];

export interface StageConfig {
  units: number;
  activation: ActivationKind;
  learningRate: number;
}

/** Map one block's [units, activation, lr] codes onto a stage config. */
export function decodeStage(codes: number[]): StageConfig {
  const [unitsCode, actCode, lrCode] = codes;
  return {
    units: 4 + unitsCode,
    activation: ACTIVATIONS[actCode],
    // codes 0..10 sweep 1e-3..1e-1 on a log scale
    learningRate: 0.001 * Math.pow(10, lrCode / 5),
  };
}

function activate(z: number, kind: ActivationKind): number {
  if (kind === "relu") return z > 0 ? z : 0;
  if (kind === "tanh") return Math.tanh(z);
  return 1 / (1 + Math.exp(-z));
}

function activationGrad(a: number, kind: ActivationKind): number {
  if (kind === "relu") return a > 0 ? 1 : 0;
  if (kind === "tanh") return 1 - a * a;
  return a * (1 - a);
}

class Dense {
  readonly w: number[][]; // inDim x outDim
  readonly b: number[];

  constructor(inDim: number, outDim: number, rng: Rng) {
    const scale = Math.sqrt(6 / (inDim + outDim));
    this.w = Array.from({ length: inDim }, () =>
      Array.from({ length: outDim }, () => (rng() * 2 - 1) * scale)
    );
    this.b = new Array<number>(outDim).fill(0);
  }

  affine(x: number[]): number[] {
    const out = this.b.slice();
    for (let i = 0; i < x.length; i++) {
      const xi = x[i];
      if (xi === 0) continue;
      const row = this.w[i];
      for (let j = 0; j < out.length; j++) out[j] += xi * row[j];
    }
    return out;
  }
}

function softmax(logits: number[]): number[] {
  const top = Math.max(...logits);
  const exps = logits.map((v) => Math.exp(v - top));
  const total = exps.reduce((acc, v) => acc + v, 0);
  return exps.map((v) => v / total);
}

function argmax(values: number[]): number {
  let best = 0;
  for (let i = 1; i < values.length; i++) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

export class SegmentNet {
  readonly configs: StageConfig[];
  readonly stages: Dense[];
  readonly head: Dense;

  constructor(inDim: number, configs: StageConfig[], rng: Rng) {
    this.configs = configs;
    this.stages = [];
    let d = inDim;
    for (const cfg of configs) {
      this.stages.push(new Dense(d, cfg.units, rng));
      d = cfg.units;
    }
    this.head = new Dense(d, N_CLASSES, rng);
  }

  /** Features after the last stage; what downstream segments consume. */
  transform(x: number[]): number[] {
    let a = x;
    for (let s = 0; s < this.stages.length; s++) {
      const kind = this.configs[s].activation;
      a = this.stages[s].affine(a).map((z) => activate(z, kind));
    }
    return a;
  }

  predict(x: number[]): number {
    return argmax(this.head.affine(this.transform(x)));
  }

  trainBatch(xs: number[][], ys: number[]): void {
    const grads = this.stages.map((stage) => ({
      w: stage.w.map((row) => new Array<number>(row.length).fill(0)),
      b: new Array<number>(stage.b.length).fill(0),
    }));
    const headGrad = {
      w: this.head.w.map((row) => new Array<number>(row.length).fill(0)),
      b: new Array<number>(this.head.b.length).fill(0),
    };
    const scale = 1 / xs.length;

    for (let n = 0; n < xs.length; n++) {
      // forward, keeping every stage's output for the backward pass
      const acts: number[][] = [xs[n]];
      for (let s = 0; s < this.stages.length; s++) {
        const kind = this.configs[s].activation;
        acts.push(this.stages[s].affine(acts[s]).map((z) => activate(z, kind)));
      }
      const last = acts[acts.length - 1];
      const probs = softmax(this.head.affine(last));
      const dLogits = probs.slice();
      dLogits[ys[n]] -= 1;

      let dOut = new Array<number>(last.length).fill(0);
      for (let i = 0; i < last.length; i++) {
        const row = this.head.w[i];
        const gw = headGrad.w[i];
        for (let j = 0; j < dLogits.length; j++) {
          gw[j] += scale * last[i] * dLogits[j];
          dOut[i] += row[j] * dLogits[j];
        }
      }
      for (let j = 0; j < dLogits.length; j++) headGrad.b[j] += scale * dLogits[j];

      for (let s = this.stages.length - 1; s >= 0; s--) {
        const kind = this.configs[s].activation;
        const out = acts[s + 1];
        const inp = acts[s];
        const dZ = dOut.map((g, j) => g * activationGrad(out[j], kind));
        const grad = grads[s];
        const dPrev = new Array<number>(inp.length).fill(0);
        for (let i = 0; i < inp.length; i++) {
          const row = this.stages[s].w[i];
          const gw = grad.w[i];
          for (let j = 0; j < dZ.length; j++) {
            gw[j] += scale * inp[i] * dZ[j];
            dPrev[i] += row[j] * dZ[j];
          }
        }
        for (let j = 0; j < dZ.length; j++) grad.b[j] += scale * dZ[j];
        dOut = dPrev;
      }
    }

    for (let s = 0; s < this.stages.length; s++) {
      const lr = this.configs[s].learningRate;
      const stage = this.stages[s];
      const grad = grads[s];
      for (let i = 0; i < stage.w.length; i++) {
        for (let j = 0; j < stage.w[i].length; j++) stage.w[i][j] -= lr * grad.w[i][j];
      }
      for (let j = 0; j < stage.b.length; j++) stage.b[j] -= lr * grad.b[j];
    }
    for (let i = 0; i < this.head.w.length; i++) {
      for (let j = 0; j < this.head.w[i].length; j++) {
        this.head.w[i][j] -= HEAD_LR * headGrad.w[i][j];
      }
    }
    for (let j = 0; j < this.head.b.length; j++) this.head.b[j] -= HEAD_LR * headGrad.b[j];
  }
}

export interface TrainResult {
  net: SegmentNet;
  fitness: number;
  perEpoch: number[];
}

function accuracy(net: SegmentNet, xs: number[][], ys: number[]): number {
  let correct = 0;
  for (let i = 0; i < xs.length; i++) {
    if (net.predict(xs[i]) === ys[i]) correct++;
  }
  return correct / xs.length;
}

/** Train the stages plus a scoring head; fitness is the best per-epoch
 * validation accuracy, and the full per-epoch trace is returned. */
export function trainSegment(
  configs: StageConfig[],
  trainX: number[][],
  trainY: number[],
  valX: number[][],
  valY: number[],
  seed: number
): TrainResult {
  const rng = mulberry32(seed);
  const net = new SegmentNet(trainX[0].length, configs, rng);
  const order = trainX.map((_, i) => i);
  const perEpoch: number[] = [];
  let fitness = -Infinity;
  for (let epoch = 0; epoch < EPOCHS; epoch++) {
    shuffleInPlace(order, rng);
    for (let start = 0; start < order.length; start += BATCH_SIZE) {
      const batch = order.slice(start, start + BATCH_SIZE);
      net.trainBatch(
        batch.map((i) => trainX[i]),
        batch.map((i) => trainY[i])
      );
    }
    const score = accuracy(net, valX, valY);
    perEpoch.push(score);
    if (score > fitness) fitness = score;
  }
  return { net, fitness, perEpoch };
}
