/**
 * Deterministic infeasible-reaction fabrication: swap one reactant of a
 * corpus reaction for a reactant drawn from another reaction. A candidate is
 * only admitted when the forward oracle would reject it (its reactant set
 * never yields its product anywhere in the true corpus), so these fakes
 * model the feasibility gap without any chemistry.
 */

import { Reaction, buildForwardIndex, contentKey, reactantKey } from './corpus.js';

/** Small deterministic PRNG (mulberry32). */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function generateInfeasible(
  corpus: Reaction[],
  fraction: number,
  seed: number,
): Reaction[] {
  if (fraction < 0 || fraction >= 1) {
    throw new Error('noise fraction must be in [0, 1)');
  }
  if (corpus.length === 0 || fraction === 0) return [];
  const rng = mulberry32(seed);
  const pick = <T>(items: T[]): T => items[Math.floor(rng() * items.length)];
  const forward = buildForwardIndex(corpus);
  const knownKeys = new Set(corpus.map(contentKey));
  const wanted = Math.round(corpus.length * fraction);

  const fakes: Reaction[] = [];
  let attempts = 0;
  while (fakes.length < wanted && attempts < 50 * wanted) {
    attempts += 1;
    const source = pick(corpus);
    const donor = pick(corpus);
    const replacement = pick(donor.reactants);
    const position = Math.floor(rng() * source.reactants.length);
    const reactants = [...source.reactants];
    reactants[position] = replacement;
    if (reactants.includes(source.product)) continue;
    if (new Set(reactants).size !== reactants.length) continue;
    const products = forward.get(reactantKey(reactants)) ?? [];
    if (products.includes(source.product)) continue; // oracle would pass it
    const fake: Reaction = { product: source.product, reactants };
    const key = contentKey(fake);
    if (knownKeys.has(key)) continue;
    knownKeys.add(key);
    fakes.push(fake);
  }
  return fakes;
}
