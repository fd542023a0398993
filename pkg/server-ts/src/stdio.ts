/**
 * Stdio transport: one JSON object per line on stdin, one response per line
 * on stdout, in request order. Unparseable lines get an error response with
 * id "unknown"; the process never exits on bad input.
 */

import { createInterface } from 'node:readline';
import { Engine } from './engine.js';

export async function runStdio(engine: Engine): Promise<void> {
  const lines = createInterface({ input: process.stdin, terminal: false });
  for await (const line of lines) {
    if (!line.trim()) continue;
    let response: Record<string, unknown>;
    try {
      response = engine.handle(JSON.parse(line));
    } catch {
      response = { id: 'unknown', error: 'unparseable request line' };
    }
    process.stdout.write(JSON.stringify(response) + '\n');
  }
}
