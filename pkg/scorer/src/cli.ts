#!/usr/bin/env node
/**
 * Command line for the scoring service: `serve` runs the HTTP scorer,
 * `train-head` fits the logistic head on toolkit corpus/split files and
 * writes a checkpoint directory.
 */

import { readFileSync } from 'node:fs';
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { saveCheckpoint } from './model.js';
import { GoldDocument, GoldDocumentSchema } from './protocol.js';
import { createScorerServer, ScorerMode } from './server.js';
import {
  DEFAULT_TRAIN_OPTIONS,
  buildInstances,
  defaultEncoder,
  trainHead,
} from './train.js';

function loadCorpus(path: string): GoldDocument[] {
  return readFileSync(path, 'utf-8')
    .split('\n')
    .filter((line) => line.trim())
    .map((line) => GoldDocumentSchema.parse(JSON.parse(line)));
}

void yargs(hideBin(process.argv))
  .command(
    'serve',
    'Run the HTTP scorer',
    (y) =>
      y
        .option('mode', {
          choices: ['echo', 'constant', 'model'] as const,
          demandOption: true,
        })
        .option('port', { type: 'number', default: 8765 })
        .option('gold', { type: 'string', describe: 'echo: gold corpus JSONL' })
        .option('p', { type: 'number', describe: 'constant: fixed probability' })
        .option('checkpoint', { type: 'string', describe: 'model: checkpoint dir' })
        .option('max-chars', { type: 'number', describe: 'context window in characters' }),
    (argv) => {
      const server = createScorerServer({
        mode: argv.mode as ScorerMode,
        goldPath: argv.gold,
        p: argv.p,
        checkpointDir: argv.checkpoint,
        maxChars: argv.maxChars,
      });
      server.listen(argv.port, () => {
        console.log(`scorer (${argv.mode}) listening on port ${argv.port}`);
      });
    },
  )
  .command(
    'train-head',
    'Fit the logistic head and write a checkpoint',
    (y) =>
      y
        .option('corpus', { type: 'string', demandOption: true })
        .option('split', { type: 'string', demandOption: true })
        .option('out', { type: 'string', demandOption: true })
        .option('epochs', { type: 'number', default: DEFAULT_TRAIN_OPTIONS.epochs })
        .option('batch', { type: 'number', default: DEFAULT_TRAIN_OPTIONS.batchSize })
        .option('lr', { type: 'number', default: DEFAULT_TRAIN_OPTIONS.learningRate })
        .option('seed', { type: 'number', default: DEFAULT_TRAIN_OPTIONS.seed }),
    (argv) => {
      const docs = new Map(loadCorpus(argv.corpus).map((d) => [d.id, d]));
      const split = JSON.parse(readFileSync(argv.split, 'utf-8')) as {
        train: string[];
        validation: string[];
      };
      const pick = (ids: string[]) =>
        ids.map((id) => {
          const doc = docs.get(id);
          if (!doc) throw new Error(`split references unknown doc id ${id}`);
          return doc;
        });
      const encoder = defaultEncoder(argv.seed);
      const result = trainHead(
        buildInstances(pick(split.train), encoder),
        buildInstances(pick(split.validation), encoder),
        encoder,
        { epochs: argv.epochs, batchSize: argv.batch, learningRate: argv.lr, seed: argv.seed },
      );
      const best = result.history[result.bestEpoch];
      saveCheckpoint(argv.out, result.model, {
        epochs: argv.epochs,
        batchSize: argv.batch,
        learningRate: argv.lr,
        seed: argv.seed,
        bestEpoch: result.bestEpoch,
        bestValF1: best.valF1,
        dim: encoder.dim,
      });
      console.log(
        `best epoch ${result.bestEpoch}  val F1 ${best.valF1.toFixed(4)}  checkpoint ${argv.out}`,
      );
    },
  )
  .demandCommand(1)
  .strict()
  .help()
  .parse();
