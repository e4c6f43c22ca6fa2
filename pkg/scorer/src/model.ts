/**
 * Frozen hashed bag-of-words sentence encoder with a trainable logistic
 * head. The encoder is deterministic given (seed, dim): token buckets and
 * signs come from a seeded hash, so the same checkpoint always reproduces
 * the same probabilities.
 */

import { mkdirSync, readFileSync, writeFileSync } from 'node:fs';
import { join } from 'node:path';

export const DEFAULT_DIM = 256;

/** 32-bit FNV-1a, mixed with the encoder seed. */
function fnv1a(token: string, seed: number): number {
  let h = (0x811c9dc5 ^ seed) >>> 0;
  for (let i = 0; i < token.length; i++) {
    h ^= token.charCodeAt(i);
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h;
}

export interface EncoderConfig {
  dim: number;
  seed: number;
}

/** Lowercased word tokens of a text span. */
export function tokenize(text: string): string[] {
  return text.toLowerCase().match(/[a-z0-9]+/g) ?? [];
}

/** Embed one sentence as a signed hashed bag of words. */
export function embed(sentence: string, config: EncoderConfig): Float64Array {
  const x = new Float64Array(config.dim);
  for (const token of tokenize(sentence)) {
    const h = fnv1a(token, config.seed);
    const bucket = h % config.dim;
    const sign = (h >>> 16) & 1 ? 1 : -1;
    x[bucket] += sign;
  }
  return x;
}

/**
 * One feature vector per candidate: the sentence is the text between the
 * previous candidate (or the document start) and the candidate offset.
 */
export function candidateFeatures(
  text: string,
  candidates: number[],
  config: EncoderConfig,
): Float64Array[] {
  const features: Float64Array[] = [];
  let prev = 0;
  for (const offset of candidates) {
    features.push(embed(text.slice(prev, offset), config));
    prev = offset;
  }
  return features;
}

export interface HeadModel {
  weights: number[];
  bias: number;
  encoder: EncoderConfig;
}

export function zeroHead(encoder: EncoderConfig): HeadModel {
  return { weights: new Array(encoder.dim).fill(0), bias: 0, encoder };
}

export function sigmoid(z: number): number {
  return 1 / (1 + Math.exp(-z));
}

export function predictProba(model: HeadModel, x: Float64Array): number {
  let z = model.bias;
  for (let i = 0; i < model.weights.length; i++) {
    z += model.weights[i] * x[i];
  }
  return sigmoid(z);
}

export interface CheckpointMetadata {
  epochs: number;
  batchSize: number;
  learningRate: number;
  seed: number;
  bestEpoch: number;
  bestValF1: number;
  dim: number;
}

/** Checkpoint layout: weights.json + metadata.json in one directory. */
export function saveCheckpoint(
  dir: string,
  model: HeadModel,
  metadata: CheckpointMetadata,
): void {
  mkdirSync(dir, { recursive: true });
  writeFileSync(
    join(dir, 'weights.json'),
    JSON.stringify({ weights: model.weights, bias: model.bias, encoder: model.encoder }, null, 2),
  );
  writeFileSync(join(dir, 'metadata.json'), JSON.stringify(metadata, null, 2));
}

export function loadCheckpoint(dir: string): { model: HeadModel; metadata: CheckpointMetadata } {
  const weights = JSON.parse(readFileSync(join(dir, 'weights.json'), 'utf-8'));
  const metadata = JSON.parse(readFileSync(join(dir, 'metadata.json'), 'utf-8'));
  return {
    model: { weights: weights.weights, bias: weights.bias, encoder: weights.encoder },
    metadata,
  };
}
