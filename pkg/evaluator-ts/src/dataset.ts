/** Bundled synthetic 8x8-image-style classification set.
 *
 * Ten noisy class prototypes, regenerated deterministically from a fixed
 * seed at startup: 600 training and 200 validation samples, pixel values
 * in [0, 1], labels assigned round-robin so every class appears equally
 * often in both splits.
 */

import { mulberry32, Rng } from "./rng.js";

export const IMAGE_DIM = 64;
export const N_CLASSES = 10;
export const TRAIN_SIZE = 600;
export const VAL_SIZE = 200;

const DATASET_SEED = 0x0833;
const PIXEL_NOISE = 0.25;

export interface Dataset {
  trainX: number[][];
  trainY: number[];
  valX: number[][];
  valY: number[];
}

function sampleAround(prototype: number[], rng: Rng): number[] {
  return prototype.map((p) => {
    const v = p + PIXEL_NOISE * (rng() * 2 - 1);
    return v < 0 ? 0 : v > 1 ? 1 : v;
  });
}

export function buildDataset(): Dataset {
  const rng = mulberry32(DATASET_SEED);
  const prototypes: number[][] = [];
  for (let c = 0; c < N_CLASSES; c++) {
    prototypes.push(Array.from({ length: IMAGE_DIM }, () => rng()));
  }
  const split = (count: number) => {
    const xs: number[][] = [];
    const ys: number[] = [];
    for (let i = 0; i < count; i++) {
      const label = i % N_CLASSES;
      xs.push(sampleAround(prototypes[label], rng));
      ys.push(label);
    }
    return { xs, ys };
  };
  const train = split(TRAIN_SIZE);
  const val = split(VAL_SIZE);
  return { trainX: train.xs, trainY: train.ys, valX: val.xs, valY: val.ys };
}
