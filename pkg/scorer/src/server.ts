/**
 * HTTP scoring service. POST /score answers the wire protocol in one of
 * three modes:
 *
 * - echo: 1.0 exactly at the gold break offsets of a provided corpus file,
 *   0.0 elsewhere;
 * - constant: one fixed probability for every candidate;
 * - model: logistic head over the frozen sentence encoder, loaded from a
 *   checkpoint directory.
 *
 * Malformed requests get `{ "error": string }` and the connection stays
 * alive. Candidates past the context window are zero-filled and flagged in
 * a warning field.
 */

import { createServer, IncomingMessage, Server, ServerResponse } from 'node:http';
import { readFileSync } from 'node:fs';

import { HeadModel, candidateFeatures, loadCheckpoint, predictProba } from './model.js';
import {
  ErrorResponse,
  ScoreRequest,
  ScoreRequestSchema,
  ScoreResponse,
  parseGoldCorpus,
} from './protocol.js';

export type ScorerMode = 'echo' | 'constant' | 'model';

export interface ScorerOptions {
  mode: ScorerMode;
  /** echo mode: path to the gold corpus JSONL. */
  goldPath?: string;
  /** constant mode: the probability to return. */
  p?: number;
  /** model mode: checkpoint directory. */
  checkpointDir?: string;
  /** Text beyond this many characters is outside the context window. */
  maxChars?: number;
}

export class ScorerService {
  private readonly mode: ScorerMode;
  private readonly gold: Map<string, Set<number>>;
  private readonly constantP: number;
  private readonly model: HeadModel | null;
  private readonly maxChars: number;

  constructor(options: ScorerOptions) {
    this.mode = options.mode;
    this.maxChars = options.maxChars ?? Number.POSITIVE_INFINITY;
    this.gold = new Map();
    this.constantP = options.p ?? 0.5;
    this.model = null;

    if (options.mode === 'echo') {
      if (!options.goldPath) {
        throw new Error('echo mode requires a gold corpus file');
      }
      this.gold = parseGoldCorpus(readFileSync(options.goldPath, 'utf-8'));
    } else if (options.mode === 'constant') {
      if (this.constantP < 0 || this.constantP > 1) {
        throw new Error(`constant probability must be in [0, 1], got ${this.constantP}`);
      }
    } else {
      if (!options.checkpointDir) {
        throw new Error('model mode requires a checkpoint directory');
      }
      this.model = loadCheckpoint(options.checkpointDir).model;
    }
  }

  score(request: ScoreRequest): ScoreResponse | ErrorResponse {
    const inWindow = request.candidates.filter((c) => c <= this.maxChars);
    let probabilities: number[];

    if (this.mode === 'echo') {
      const gold = this.gold.get(request.doc_id);
      if (gold === undefined) {
        return { error: `unknown doc_id: ${request.doc_id}` };
      }
      probabilities = inWindow.map((c) => (gold.has(c) ? 1.0 : 0.0));
    } else if (this.mode === 'constant') {
      probabilities = inWindow.map(() => this.constantP);
    } else {
      const features = candidateFeatures(request.text, inWindow, this.model!.encoder);
      probabilities = features.map((x) => predictProba(this.model!, x));
    }

    const truncated = request.candidates.length - inWindow.length;
    while (probabilities.length < request.candidates.length) {
      probabilities.push(0.0);
    }
    const response: ScoreResponse = { doc_id: request.doc_id, probabilities };
    if (truncated > 0) {
      response.warning = `${truncated} candidate(s) beyond the ${this.maxChars}-character window were zero-filled`;
    }
    return response;
  }
}

function readBody(req: IncomingMessage): Promise<string> {
  return new Promise((resolve, reject) => {
    const chunks: Buffer[] = [];
    req.on('data', (chunk) => chunks.push(chunk));
    req.on('end', () => resolve(Buffer.concat(chunks).toString('utf-8')));
    req.on('error', reject);
  });
}

function send(res: ServerResponse, status: number, payload: unknown): void {
  const body = JSON.stringify(payload);
  res.writeHead(status, {
    'Content-Type': 'application/json',
    'Content-Length': Buffer.byteLength(body),
  });
  res.end(body);
}

export function createScorerServer(options: ScorerOptions): Server {
  const service = new ScorerService(options);
  return createServer(async (req, res) => {
    if (req.method !== 'POST' || req.url !== '/score') {
      send(res, 404, { error: `no such endpoint: ${req.method} ${req.url}` });
      return;
    }
    let parsed: ScoreRequest;
    try {
      const body = JSON.parse(await readBody(req));
      parsed = ScoreRequestSchema.parse(body);
    } catch (err) {
      send(res, 400, { error: `malformed request: ${(err as Error).message}` });
      return;
    }
    const result = service.score(parsed);
    send(res, 'error' in result ? 400 : 200, result);
  });
}
