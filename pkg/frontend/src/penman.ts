/**
 * Minimal PENMAN graph reader plus the deterministic template realizer.
 *
 * Mirrors the pipeline's conventions exactly: inverse ("-of") roles are
 * rewritten to forward edges at construction, re-entrant variables unify,
 * and realization walks :ARG0/:ARG1 subtrees before their head.
 */

export class PenmanError extends Error {}

export interface Edge {
  source: string;
  role: string;
  target: string;
}

export interface Graph {
  root: string;
  nodes: Map<string, string>;
  edges: Edge[];
}

const CONSTANT_WORDS = new Set(["-", "+", "interrogative", "imperative", "expressive"]);
const NUMBER_RE = /^[+-]?\d+(\.\d+)?$/;
const SENSE_RE = /^.+-\d{2}$/;

export function isConstantToken(token: string): boolean {
  return token.startsWith('"') || CONSTANT_WORDS.has(token) || NUMBER_RE.test(token);
}

export function stripSense(concept: string): string {
  return SENSE_RE.test(concept) ? concept.slice(0, concept.lastIndexOf("-")) : concept;
}

function tokenize(text: string): string[] {
  const tokens = text.match(/\(|\)|\/|"[^"]*"|[^\s()/]+/g);
  if (!tokens) throw new PenmanError("empty PENMAN text");
  return tokens;
}

function normalizeEdge(e: Edge): Edge {
  if (e.role.endsWith("-of") && e.role.length > ":-of".length) {
    return { source: e.target, role: e.role.slice(0, -"-of".length), target: e.source };
  }
  return e;
}

class Parser {
  pos = 0;
  nodes = new Map<string, string>();
  edges: Edge[] = [];
  references: Edge[] = [];

  constructor(private tokens: string[]) {}

  private take(): string {
    if (this.pos >= this.tokens.length) throw new PenmanError("unexpected end of input");
    return this.tokens[this.pos++];
  }

  private expect(tok: string): void {
    const got = this.take();
    if (got !== tok) throw new PenmanError(`expected ${tok}, got ${got}`);
  }

  private peek(): string {
    if (this.pos >= this.tokens.length) throw new PenmanError("unexpected end of input");
    return this.tokens[this.pos];
  }

  parseNode(): string {
    this.expect("(");
    const variable = this.take();
    if (["(", ")", "/"].includes(variable) || variable.startsWith(":")) {
      throw new PenmanError(`bad variable token ${variable}`);
    }
    this.expect("/");
    const concept = this.take();
    if (["(", ")", "/"].includes(concept) || concept.startsWith(":")) {
      throw new PenmanError(`bad concept token ${concept}`);
    }
    if (this.nodes.has(variable)) throw new PenmanError(`variable ${variable} instantiated twice`);
    this.nodes.set(variable, concept);
    while (this.peek() !== ")") {
      const role = this.take();
      if (!role.startsWith(":")) throw new PenmanError(`expected role, got ${role}`);
      if (this.peek() === "(") {
        const child = this.parseNode();
        this.edges.push({ source: variable, role, target: child });
      } else {
        const target = this.take();
        if (target === ")" || target === "/") {
          throw new PenmanError(`missing target for role ${role}`);
        }
        if (!isConstantToken(target)) {
          this.references.push({ source: variable, role, target });
        }
        // Constant targets are attributes; realization ignores them.
      }
    }
    this.expect(")");
    return variable;
  }

  finish(): void {
    if (this.pos !== this.tokens.length) {
      throw new PenmanError(`trailing tokens after graph: ${this.tokens.slice(this.pos).join(" ")}`);
    }
  }
}

export function parsePenman(text: string): Graph {
  if (!text || !text.trim()) throw new PenmanError("empty PENMAN text");
  const parser = new Parser(tokenize(text));
  const root = parser.parseNode();
  parser.finish();
  for (const ref of parser.references) {
    if (!parser.nodes.has(ref.target)) {
      throw new PenmanError(`variable ${ref.target} referenced but never instantiated`);
    }
  }
  const edges = [...parser.edges, ...parser.references].map(normalizeEdge);
  return { root, nodes: parser.nodes, edges };
}

/**
 * Deterministic template realization: depth-first from the root, children in
 * (role, target) order, :ARG0/:ARG1 subtrees emitted before their head and
 * everything else after, sense suffixes stripped.
 */
export function realize(graph: Graph): string {
  const visited = new Set<string>();

  function emit(variable: string): string[] {
    visited.add(variable);
    const children = graph.edges
      .filter((e) => e.source === variable)
      .map((e) => [e.role, e.target] as const)
      .sort((a, b) => (a[0] < b[0] ? -1 : a[0] > b[0] ? 1 : a[1] < b[1] ? -1 : a[1] > b[1] ? 1 : 0));
    const before: string[] = [];
    const after: string[] = [];
    for (const [role, child] of children) {
      if (visited.has(child)) continue;
      const bucket = role === ":ARG0" || role === ":ARG1" ? before : after;
      bucket.push(...emit(child));
    }
    return [...before, stripSense(graph.nodes.get(variable)!), ...after];
  }

  return emit(graph.root).join(" ");
}
