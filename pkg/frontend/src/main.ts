/**
 * Bridge entry point.
 *
 * Usage: main.js --mode {real|mock} (--stdio | --listen [HOST:]PORT)
 *
 * Serves the line-delimited JSON protocol over standard streams or a local
 * TCP socket. One response line per request line; errors never terminate the
 * stream.
 */

import net from "node:net";
import process from "node:process";
import readline from "node:readline";

import { handleLine, Mode } from "./protocol.js";

interface Options {
  mode: Mode;
  stdio: boolean;
  listen: { host: string; port: number } | null;
}

function usage(message: string): never {
  process.stderr.write(`${message}\nusage: main.js --mode {real|mock} (--stdio | --listen [HOST:]PORT)\n`);
  process.exit(2);
}

export function parseArgs(argv: string[]): Options {
  const options: Options = { mode: "mock", stdio: false, listen: null };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--mode") {
      const value = argv[++i];
      if (value !== "real" && value !== "mock") usage(`bad --mode: ${value}`);
      options.mode = value;
    } else if (arg === "--stdio") {
      options.stdio = true;
    } else if (arg === "--listen") {
      const value = argv[++i];
      if (!value) usage("--listen needs [HOST:]PORT");
      const sep = value.lastIndexOf(":");
      const host = sep >= 0 ? value.slice(0, sep) || "127.0.0.1" : "127.0.0.1";
      const port = Number(sep >= 0 ? value.slice(sep + 1) : value);
      if (!Number.isInteger(port) || port < 0 || port > 65535) usage(`bad port in ${value}`);
      options.listen = { host, port };
    } else {
      usage(`unknown argument: ${arg}`);
    }
  }
  if (options.stdio === (options.listen !== null)) usage("pick exactly one of --stdio / --listen");
  return options;
}

function serveStream(input: NodeJS.ReadableStream, write: (line: string) => void, mode: Mode): void {
  const rl = readline.createInterface({ input, crlfDelay: Infinity });
  rl.on("line", (line) => {
    const response = handleLine(line, mode);
    if (response !== null) write(JSON.stringify(response) + "\n");
  });
}

function main(): void {
  const options = parseArgs(process.argv.slice(2));
  if (options.stdio) {
    serveStream(process.stdin, (line) => process.stdout.write(line), options.mode);
    return;
  }
  const { host, port } = options.listen!;
  const server = net.createServer((socket) => {
    serveStream(socket, (line) => socket.write(line), options.mode);
    socket.on("error", () => socket.destroy());
  });
  server.on("error", (e) => {
    process.stderr.write(`cannot bind ${host}:${port}: ${e.message}\n`);
    process.exit(2);
  });
  server.listen(port, host, () => {
    const addr = server.address() as net.AddressInfo;
    process.stderr.write(`listening on ${addr.address}:${addr.port}\n`);
  });
}

main();
