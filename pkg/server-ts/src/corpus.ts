/**
 * Reaction corpus loading and the two lookup indexes the server answers from:
 * an exact-product retro index (corpus order, deduplicated by content) and a
 * forward index mapping sorted reactant sets to products ranked by corpus
 * frequency, ties broken lexicographically.
 */

import { readFileSync } from 'node:fs';

export interface Reaction {
  product: string;
  reactants: string[];
}

export function contentKey(reaction: Reaction): string {
  return reaction.product + '<=' + [...reaction.reactants].sort().join('+');
}

export function reactantKey(reactants: string[]): string {
  return [...reactants].sort().join('+');
}

export function loadCorpus(path: string): Reaction[] {
  const corpus: Reaction[] = [];
  const lines = readFileSync(path, 'utf-8').split('\n');
  lines.forEach((line, index) => {
    if (!line.trim()) return;
    let record: unknown;
    try {
      record = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}:${index + 1}: invalid JSON`);
    }
    const obj = record as { product?: unknown; reactants?: unknown };
    if (typeof obj.product !== 'string' || !obj.product.trim()) {
      throw new Error(`${path}:${index + 1}: missing or empty 'product'`);
    }
    if (
      !Array.isArray(obj.reactants) ||
      obj.reactants.length === 0 ||
      !obj.reactants.every((r) => typeof r === 'string' && r.trim())
    ) {
      throw new Error(`${path}:${index + 1}: 'reactants' must be a nonempty string list`);
    }
    corpus.push({
      product: obj.product.trim(),
      reactants: obj.reactants.map((r) => (r as string).trim()),
    });
  });
  return corpus;
}

/** product -> unique reactions in corpus order */
export function buildRetroIndex(corpus: Reaction[]): Map<string, Reaction[]> {
  const index = new Map<string, Reaction[]>();
  const seen = new Set<string>();
  for (const reaction of corpus) {
    const key = contentKey(reaction);
    if (seen.has(key)) continue;
    seen.add(key);
    const bucket = index.get(reaction.product);
    if (bucket) bucket.push(reaction);
    else index.set(reaction.product, [reaction]);
  }
  return index;
}

/** sorted-reactant key -> products ranked by frequency desc, then lexicographic */
export function buildForwardIndex(corpus: Reaction[]): Map<string, string[]> {
  const counts = new Map<string, Map<string, number>>();
  for (const reaction of corpus) {
    const key = reactantKey(reaction.reactants);
    let perProduct = counts.get(key);
    if (!perProduct) {
      perProduct = new Map();
      counts.set(key, perProduct);
    }
    perProduct.set(reaction.product, (perProduct.get(reaction.product) ?? 0) + 1);
  }
  const index = new Map<string, string[]>();
  for (const [key, perProduct] of counts) {
    const ranked = [...perProduct.entries()]
      .sort((a, b) => b[1] - a[1] || (a[0] < b[0] ? -1 : a[0] > b[0] ? 1 : 0))
      .map(([product]) => product);
    index.set(key, ranked);
  }
  return index;
}
