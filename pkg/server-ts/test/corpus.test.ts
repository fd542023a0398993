import { mkdtempSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { describe, expect, it } from 'vitest';

import {
  buildForwardIndex,
  buildRetroIndex,
  loadCorpus,
  Reaction,
  reactantKey,
} from '../src/corpus.js';

const rx = (product: string, reactants: string[]): Reaction => ({ product, reactants });

describe('loadCorpus', () => {
  it('parses ndjson and keeps duplicates', () => {
    const dir = mkdtempSync(join(tmpdir(), 'refsrv-'));
    const path = join(dir, 'corpus.jsonl');
    const line = JSON.stringify({ product: 'C', reactants: ['A', 'B'] });
    writeFileSync(path, line + '\n' + line + '\n\n');
    expect(loadCorpus(path)).toHaveLength(2);
  });

  it('reports the offending line', () => {
    const dir = mkdtempSync(join(tmpdir(), 'refsrv-'));
    const path = join(dir, 'corpus.jsonl');
    writeFileSync(path, JSON.stringify({ product: 'C', reactants: ['A'] }) + '\n{oops\n');
    expect(() => loadCorpus(path)).toThrow(/:2/);
  });

  it('rejects empty reactant lists', () => {
    const dir = mkdtempSync(join(tmpdir(), 'refsrv-'));
    const path = join(dir, 'corpus.jsonl');
    writeFileSync(path, JSON.stringify({ product: 'C', reactants: [] }) + '\n');
    expect(() => loadCorpus(path)).toThrow(/reactants/);
  });
});

describe('buildRetroIndex', () => {
  it('keeps corpus order and deduplicates by content', () => {
    const index = buildRetroIndex([
      rx('C', ['B']),
      rx('C', ['A']),
      rx('C', ['B']),
      rx('D', ['C']),
    ]);
    expect(index.get('C')!.map((r) => r.reactants[0])).toEqual(['B', 'A']);
  });

  it('treats permuted reactants as the same reaction', () => {
    const index = buildRetroIndex([rx('C', ['A', 'B']), rx('C', ['B', 'A'])]);
    expect(index.get('C')).toHaveLength(1);
  });
});

describe('buildForwardIndex', () => {
  it('ranks by frequency then lexicographically', () => {
    const corpus = [
      rx('D', ['A', 'B']),
      rx('C', ['A', 'B']),
      rx('C', ['B', 'A']),
      rx('E', ['A', 'B']),
    ];
    const index = buildForwardIndex(corpus);
    expect(index.get(reactantKey(['B', 'A']))).toEqual(['C', 'D', 'E']);
  });
});
