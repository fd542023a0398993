/**
 * Entry point.
 *
 *   serve  --corpus FILE [--mode stdio|http] [--host H] [--port N]
 *          [--noise-fraction F] [--noise-seed N] [--model-tag TAG]
 *   replay --fixture FILE [--mode stdio|http] [--host H] [--port N]
 */

import { readFileSync } from 'node:fs';
import { pathToFileURL } from 'node:url';
import { parseArgs } from 'node:util';
import { loadCorpus } from './corpus.js';
import { CorpusEngine, Engine, ReplayEngine } from './engine.js';
import { runHttp } from './http.js';
import { runStdio } from './stdio.js';

function loadFixtures(path: string) {
  const fixtures: { request: Record<string, unknown>; response: Record<string, unknown> }[] = [];
  readFileSync(path, 'utf-8')
    .split('\n')
    .forEach((line, index) => {
      if (!line.trim()) return;
      let record: unknown;
      try {
        record = JSON.parse(line);
      } catch {
        throw new Error(`${path}:${index + 1}: invalid JSON`);
      }
      const obj = record as { request?: unknown; response?: unknown };
      if (!obj.request || !obj.response || typeof obj.request !== 'object' || typeof obj.response !== 'object') {
        throw new Error(`${path}:${index + 1}: fixtures need 'request' and 'response' objects`);
      }
      fixtures.push({
        request: obj.request as Record<string, unknown>,
        response: obj.response as Record<string, unknown>,
      });
    });
  return fixtures;
}

function dispatch(engine: Engine, mode: string, host: string, port: number): void {
  if (mode === 'stdio') {
    void runStdio(engine);
  } else if (mode === 'http') {
    runHttp(engine, host, port);
  } else {
    throw new Error(`unknown mode '${mode}' (expected stdio or http)`);
  }
}

export function main(argv: string[]): number {
  const command = argv[0];
  const rest = argv.slice(1);
  const { values } = parseArgs({
    args: rest,
    options: {
      corpus: { type: 'string' },
      fixture: { type: 'string' },
      mode: { type: 'string', default: 'stdio' },
      host: { type: 'string', default: '127.0.0.1' },
      port: { type: 'string', default: '0' },
      'noise-fraction': { type: 'string', default: '0' },
      'noise-seed': { type: 'string', default: '0' },
      'model-tag': { type: 'string', default: 'reference' },
    },
  });
  const mode = values.mode as string;
  const host = values.host as string;
  const port = Number(values.port);

  if (command === 'serve') {
    if (!values.corpus) {
      process.stderr.write('serve requires --corpus\n');
      return 2;
    }
    const corpus = loadCorpus(values.corpus as string);
    const engine = new CorpusEngine(corpus, {
      modelTag: values['model-tag'] as string,
      noiseFraction: Number(values['noise-fraction']),
      noiseSeed: Number(values['noise-seed']),
    });
    dispatch(engine, mode, host, port);
    return 0;
  }
  if (command === 'replay') {
    if (!values.fixture) {
      process.stderr.write('replay requires --fixture\n');
      return 2;
    }
    const engine = new ReplayEngine(loadFixtures(values.fixture as string));
    dispatch(engine, mode, host, port);
    return 0;
  }
  process.stderr.write('usage: main.js <serve|replay> [options]\n');
  return 2;
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  const code = main(process.argv.slice(2));
  if (code !== 0) process.exit(code);
}
