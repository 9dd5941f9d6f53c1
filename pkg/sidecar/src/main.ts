/**
 * Entry point: one request per process.  Reads stdin to EOF (or the first
 * newline-terminated line), responds on stdout, and reserves non-zero exit
 * for requests the protocol itself cannot accept.
 */

import { handleRequest, parseRequest, ProtocolError } from './sidecar.js';

async function readStdin(): Promise<string> {
  const chunks: Buffer[] = [];
  for await (const chunk of process.stdin) {
    chunks.push(chunk as Buffer);
    const text = Buffer.concat(chunks).toString('utf8');
    if (text.includes('\n')) {
      return text.slice(0, text.indexOf('\n'));
    }
  }
  return Buffer.concat(chunks).toString('utf8');
}

async function main(): Promise<number> {
  const raw = await readStdin();
  let request;
  try {
    request = parseRequest(raw);
  } catch (exc) {
    if (exc instanceof ProtocolError) {
      process.stderr.write(exc.message + '\n');
      return 1;
    }
    throw exc;
  }
  const response = await handleRequest(request);
  process.stdout.write(JSON.stringify(response) + '\n');
  return 0;
}

main().then(
  (code) => process.exit(code),
  (exc) => {
    process.stderr.write(String(exc) + '\n');
    process.exit(1);
  },
);
