import { describe, expect, it } from "vitest";

import { buildDataset } from "../src/dataset.js";
import { EPOCHS, decodeStage, trainSegment } from "../src/nn.js";

const data = buildDataset();

describe("stage decoding", () => {
  it("maps the three codes onto units, activation and learning rate", () => {
    expect(decodeStage([0, 0, 0])).toEqual({
      units: 4,
      activation: "relu",
      learningRate: 0.001,
    });
    const top = decodeStage([28, 2, 10]);
    expect(top.units).toBe(32);
    expect(top.activation).toBe("sigmoid");
    expect(top.learningRate).toBeCloseTo(0.1, 12);
    expect(decodeStage([10, 1, 5]).activation).toBe("tanh");
  });
});

describe("segment training", () => {
  const configs = [decodeStage([20, 0, 6]), decodeStage([12, 1, 5])];

  it("reports the best validation score over the per-epoch trace", () => {
    const result = trainSegment(
      configs,
      data.trainX,
      data.trainY,
      data.valX,
      data.valY,
      42
    );
    expect(result.perEpoch).toHaveLength(EPOCHS);
    expect(result.fitness).toBe(Math.max(...result.perEpoch));
    for (const score of result.perEpoch) {
      expect(score).toBeGreaterThanOrEqual(0);
      expect(score).toBeLessThanOrEqual(1);
    }
  });

  it("beats chance on the bundled data", () => {
    const result = trainSegment(
      configs,
      data.trainX,
      data.trainY,
      data.valX,
      data.valY,
      42
    );
    expect(result.fitness).toBeGreaterThan(0.3);
  });

  it("is deterministic for a fixed seed and differs across seeds", () => {
    const run = (seed: number) =>
      trainSegment(configs, data.trainX, data.trainY, data.valX, data.valY, seed);
    const a = run(7);
    const b = run(7);
    expect(a.perEpoch).toEqual(b.perEpoch);
    expect(a.fitness).toBe(b.fitness);
    const c = run(8);
    expect(a.perEpoch).not.toEqual(c.perEpoch);
  });

  it("transforms features to the last stage's width", () => {
    const result = trainSegment(
      configs,
      data.trainX,
      data.trainY,
      data.valX,
      data.valY,
      1
    );
    expect(result.net.transform(data.trainX[0])).toHaveLength(configs[1].units);
  });
});
