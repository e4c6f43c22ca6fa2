/**
 * Wire protocol shared with the segmentation toolkit.
 *
 * A scorer answers HTTP POST /score. The request names a document, its full
 * text, and the candidate boundary offsets; the response carries one break
 * probability per candidate, in the same order, each in [0, 1]. Malformed
 * requests are answered with `{ "error": string }` and the connection stays
 * open.
 */

import { z } from 'zod';

export const ScoreRequestSchema = z.object({
  doc_id: z.string().min(1),
  text: z.string(),
  candidates: z.array(z.number().int().nonnegative()),
});

export type ScoreRequest = z.infer<typeof ScoreRequestSchema>;

export interface ScoreResponse {
  doc_id: string;
  probabilities: number[];
  /** Present when candidates past the context window were zero-filled. */
  warning?: string;
}

export interface ErrorResponse {
  error: string;
}

/** A gold document record as serialized by the toolkit's corpus files. */
export const GoldDocumentSchema = z.object({
  id: z.string(),
  text: z.string(),
  step_offsets: z.array(z.number().int()),
  candidates: z.array(z.number().int()),
});

export type GoldDocument = z.infer<typeof GoldDocumentSchema>;

/** Parse a JSONL corpus file body into a doc-id -> gold break set map. */
export function parseGoldCorpus(body: string): Map<string, Set<number>> {
  const gold = new Map<string, Set<number>>();
  for (const line of body.split('\n')) {
    if (!line.trim()) continue;
    const doc = GoldDocumentSchema.parse(JSON.parse(line));
    gold.set(doc.id, new Set(doc.step_offsets));
  }
  return gold;
}
