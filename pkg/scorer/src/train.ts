/**
 * Head training: mini-batch gradient descent on cross-entropy over the
 * frozen encoder features, keeping the checkpoint with the best validation
 * F1 (earliest epoch on ties).
 */

import {
  DEFAULT_DIM,
  EncoderConfig,
  HeadModel,
  candidateFeatures,
  predictProba,
  zeroHead,
} from './model.js';
import { GoldDocument } from './protocol.js';

export interface TrainOptions {
  epochs: number;
  batchSize: number;
  learningRate: number;
  seed: number;
}

export const DEFAULT_TRAIN_OPTIONS: TrainOptions = {
  epochs: 20,
  batchSize: 16,
  learningRate: 5e-5,
  seed: 0,
};

export interface LabeledInstance {
  x: Float64Array;
  y: number;
}

export interface EpochStats {
  epoch: number;
  trainLoss: number;
  valPrecision: number;
  valRecall: number;
  valF1: number;
}

export interface TrainResult {
  model: HeadModel;
  bestEpoch: number;
  history: EpochStats[];
}

/** Candidate-level instances of a document list; label 1 at gold breaks. */
export function buildInstances(
  docs: GoldDocument[],
  encoder: EncoderConfig,
): LabeledInstance[] {
  const instances: LabeledInstance[] = [];
  for (const doc of docs) {
    const gold = new Set(doc.step_offsets);
    const features = candidateFeatures(doc.text, doc.candidates, encoder);
    doc.candidates.forEach((offset, i) => {
      instances.push({ x: features[i], y: gold.has(offset) ? 1 : 0 });
    });
  }
  return instances;
}

/** Deterministic linear-congruential shuffle source. */
function makeRng(seed: number): () => number {
  let state = (seed >>> 0) || 1;
  return () => {
    state = (Math.imul(state, 1664525) + 1013904223) >>> 0;
    return state / 0x100000000;
  };
}

function shuffled<T>(items: T[], rng: () => number): T[] {
  const out = items.slice();
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(rng() * (i + 1));
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}

const EPS = 1e-12;

function crossEntropy(y: number, p: number): number {
  const clamped = Math.min(Math.max(p, EPS), 1 - EPS);
  return -(y * Math.log(clamped) + (1 - y) * Math.log(1 - clamped));
}

export function f1Score(pairs: Array<[number, number]>): {
  precision: number;
  recall: number;
  f1: number;
} {
  let tp = 0;
  let nPred = 0;
  let nTrue = 0;
  for (const [yTrue, yPred] of pairs) {
    if (yTrue === 1 && yPred === 1) tp++;
    if (yPred === 1) nPred++;
    if (yTrue === 1) nTrue++;
  }
  const precision = nPred === 0 ? (nTrue === 0 ? 1 : 0) : tp / nPred;
  const recall = nTrue === 0 ? (nPred === 0 ? 1 : 0) : tp / nTrue;
  const f1 = precision + recall === 0 ? 0 : (2 * precision * recall) / (precision + recall);
  return { precision, recall, f1 };
}

export function trainHead(
  trainSet: LabeledInstance[],
  valSet: LabeledInstance[],
  encoder: EncoderConfig,
  options: TrainOptions,
): TrainResult {
  if (trainSet.length === 0) {
    throw new Error('empty training set');
  }
  const model = zeroHead(encoder);
  const rng = makeRng(options.seed);
  const history: EpochStats[] = [];
  let bestEpoch = 0;
  let bestF1 = -1;
  let bestWeights = model.weights.slice();
  let bestBias = model.bias;

  for (let epoch = 0; epoch < options.epochs; epoch++) {
    const order = shuffled(trainSet, rng);
    let totalLoss = 0;
    for (let start = 0; start < order.length; start += options.batchSize) {
      const batch = order.slice(start, start + options.batchSize);
      const gradW = new Float64Array(encoder.dim);
      let gradB = 0;
      for (const { x, y } of batch) {
        const p = predictProba(model, x);
        totalLoss += crossEntropy(y, p);
        const residual = (p - y) / batch.length;
        for (let i = 0; i < encoder.dim; i++) {
          gradW[i] += residual * x[i];
        }
        gradB += residual;
      }
      for (let i = 0; i < encoder.dim; i++) {
        model.weights[i] -= options.learningRate * gradW[i];
      }
      model.bias -= options.learningRate * gradB;
    }

    const pairs: Array<[number, number]> = valSet.map(({ x, y }) => [
      y,
      predictProba(model, x) > 0.5 ? 1 : 0,
    ]);
    const { precision, recall, f1 } = f1Score(pairs);
    history.push({
      epoch,
      trainLoss: totalLoss / trainSet.length,
      valPrecision: precision,
      valRecall: recall,
      valF1: f1,
    });
    if (f1 > bestF1) {
      bestF1 = f1;
      bestEpoch = epoch;
      bestWeights = model.weights.slice();
      bestBias = model.bias;
    }
  }

  return {
    model: { weights: bestWeights, bias: bestBias, encoder },
    bestEpoch,
    history,
  };
}

export function defaultEncoder(seed: number): EncoderConfig {
  return { dim: DEFAULT_DIM, seed };
}
