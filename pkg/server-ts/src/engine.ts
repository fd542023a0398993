/**
 * Request handling engines. Every response carries the request's id; a
 * malformed or unmatched request yields an error response, never a crash.
 *
 *   {"id": "...", "op": "propose", "target": "...", "limit": N}
 *     -> {"id": "...", "proposals": [{"reactants": [...], "score": null, "model": "..."}]}
 *   {"id": "...", "op": "check", "reactants": [...], "target": "...", "limit": N}
 *     -> {"id": "...", "products": [...]}
 */

import {
  Reaction,
  buildForwardIndex,
  buildRetroIndex,
  reactantKey,
} from './corpus.js';
import { generateInfeasible } from './noise.js';

export interface Engine {
  handle(request: unknown): Record<string, unknown>;
}

const DEFAULT_LIMIT = 10;

function requestId(request: unknown): string {
  if (request && typeof request === 'object') {
    const id = (request as Record<string, unknown>).id;
    if (typeof id === 'string') return id;
  }
  return 'unknown';
}

function errorResponse(id: string, message: string): Record<string, unknown> {
  return { id, error: message };
}

export interface CorpusEngineOptions {
  modelTag?: string;
  noiseFraction?: number;
  noiseSeed?: number;
}

export class CorpusEngine implements Engine {
  private retro: Map<string, Reaction[]>;
  private forward: Map<string, string[]>;
  private noiseByProduct: Map<string, Reaction[]>;
  private modelTag: string;

  constructor(corpus: Reaction[], options: CorpusEngineOptions = {}) {
    this.modelTag = options.modelTag ?? 'reference';
    this.retro = buildRetroIndex(corpus);
    this.forward = buildForwardIndex(corpus);
    this.noiseByProduct = new Map();
    const fakes = generateInfeasible(
      corpus,
      options.noiseFraction ?? 0,
      options.noiseSeed ?? 0,
    );
    for (const fake of fakes) {
      const bucket = this.noiseByProduct.get(fake.product);
      if (bucket) bucket.push(fake);
      else this.noiseByProduct.set(fake.product, [fake]);
    }
  }

  handle(request: unknown): Record<string, unknown> {
    const id = requestId(request);
    if (!request || typeof request !== 'object') {
      return errorResponse(id, 'request must be a JSON object');
    }
    const req = request as Record<string, unknown>;
    const op = req.op;
    if (op === 'propose') return this.propose(id, req);
    if (op === 'check') return this.check(id, req);
    return errorResponse(id, `unsupported op ${JSON.stringify(op ?? null)}`);
  }

  private propose(id: string, req: Record<string, unknown>): Record<string, unknown> {
    const target = req.target;
    if (typeof target !== 'string' || !target.trim()) {
      return errorResponse(id, "propose needs a string 'target'");
    }
    const limit = typeof req.limit === 'number' && req.limit >= 1 ? req.limit : DEFAULT_LIMIT;
    const real = this.retro.get(target.trim()) ?? [];
    const noise = this.noiseByProduct.get(target.trim()) ?? [];
    const proposals = [...real, ...noise].slice(0, limit).map((reaction) => ({
      reactants: reaction.reactants,
      score: null,
      model: this.modelTag,
    }));
    return { id, proposals };
  }

  private check(id: string, req: Record<string, unknown>): Record<string, unknown> {
    const reactants = req.reactants;
    if (
      !Array.isArray(reactants) ||
      reactants.length === 0 ||
      !reactants.every((r) => typeof r === 'string')
    ) {
      return errorResponse(id, "check needs a nonempty string list 'reactants'");
    }
    const limit = typeof req.limit === 'number' && req.limit >= 1 ? req.limit : DEFAULT_LIMIT;
    const products = this.forward.get(reactantKey(reactants as string[])) ?? [];
    return { id, products: products.slice(0, limit) };
  }
}

/** Canonical key of a request ignoring its id: op-specific fields, sorted. */
export function replayKey(request: Record<string, unknown>): string {
  const entries = Object.entries(request)
    .filter(([key]) => key !== 'id')
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0));
  return JSON.stringify(entries);
}

export class ReplayEngine implements Engine {
  private responses = new Map<string, Record<string, unknown>>();

  constructor(fixtures: { request: Record<string, unknown>; response: Record<string, unknown> }[]) {
    for (const { request, response } of fixtures) {
      this.responses.set(replayKey(request), response);
    }
  }

  handle(request: unknown): Record<string, unknown> {
    const id = requestId(request);
    if (!request || typeof request !== 'object') {
      return errorResponse(id, 'request must be a JSON object');
    }
    const canned = this.responses.get(replayKey(request as Record<string, unknown>));
    if (!canned) {
      return errorResponse(id, 'no fixture matches this request');
    }
    const response = { ...canned };
    response.id = id;
    return response;
  }
}
