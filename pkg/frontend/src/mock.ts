/**
 * Deterministic mock implementations of the three bridge operations.
 *
 * `amrToText` reproduces the pipeline's built-in template realization so an
 * integration run through the bridge matches an offline run; `gruen` is a
 * fixed word-count formula designed to land on both sides of the pipeline's
 * 0.7 quality threshold; `textToAmr` builds a fixed template graph over the
 * nouns of the shared lexicon found in the input.
 */

import { parsePenman, realize } from "./penman.js";

// Same noun lexicon the pipeline's fixtures ship (fixtures/nouns.txt).
export const LEXICON_NOUNS = [
  "boat", "ship", "dock", "house", "home", "man", "person", "male", "woman",
  "dog", "water", "lawn", "ball", "park", "bench", "tree", "boy", "girl",
];

const NOUN_SET = new Set(LEXICON_NOUNS);
const PUNCT_ONLY = /^\W+$/;

/** Whitespace tokens, punctuation-only tokens dropped. */
export function wordCount(text: string): number {
  return text.split(/\s+/).filter((tok) => tok.length > 0 && !PUNCT_ONLY.test(tok)).length;
}

export function gruen(text: string): number {
  const score = 0.5 + 0.05 * Math.min(wordCount(text), 10);
  return Math.min(1, Math.max(0, score));
}

export function amrToText(penman: string): string {
  return realize(parsePenman(penman));
}

export function textToAmr(text: string): string {
  const seen = new Set<string>();
  const nouns: string[] = [];
  for (const raw of text.toLowerCase().split(/\s+/)) {
    const word = raw.replace(/^\W+|\W+$/g, "");
    if (NOUN_SET.has(word) && !seen.has(word)) {
      seen.add(word);
      nouns.push(word);
    }
  }
  if (nouns.length === 0) return "(z0 / thing)";
  // One show-01 predicate; the recognized nouns fill :ARG1..:ARG5.
  const parts = [`(z0 / show-01`];
  nouns.slice(0, 5).forEach((noun, i) => {
    parts.push(` :ARG${i + 1} (z${i + 1} / ${noun})`);
  });
  parts.push(")");
  return parts.join("");
}
