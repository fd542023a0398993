/**
 * HTTP transport: each POST body is one request object, the response body is
 * the matching response object. Identical payloads to the stdio transport.
 */

import { createServer, Server } from 'node:http';
import { Engine } from './engine.js';

export function runHttp(engine: Engine, host: string, port: number): Server {
  const server = createServer((req, res) => {
    if (req.method !== 'POST') {
      res.writeHead(405, { 'content-type': 'application/json' });
      res.end(JSON.stringify({ id: 'unknown', error: 'POST required' }));
      return;
    }
    const chunks: Buffer[] = [];
    req.on('data', (chunk) => chunks.push(chunk));
    req.on('end', () => {
      let response: Record<string, unknown>;
      try {
        response = engine.handle(JSON.parse(Buffer.concat(chunks).toString('utf-8')));
      } catch {
        response = { id: 'unknown', error: 'unparseable request body' };
      }
      res.writeHead(200, { 'content-type': 'application/json' });
      res.end(JSON.stringify(response));
    });
  });
  server.listen(port, host, () => {
    const address = server.address();
    const bound = typeof address === 'object' && address ? address.port : port;
    process.stderr.write(`reference-model-server listening on ${host}:${bound}\n`);
  });
  return server;
}
