/** Character-level tokenizer over a fixed alphabet.
 *
 * The trace grammar only ever produces these characters (digits, list
 * punctuation, and the letters of its fixed keywords), so the alphabet is
 * pinned instead of scraped from data: two runs on different datasets get
 * the same token ids.
 */

export const ALPHABET =
  "\n #'*+,-/0123456789:=CEFGMNORS[]abcdefghilmnopqrstuvx";

export const BOS = ALPHABET.length;
export const EOS = ALPHABET.length + 1;
export const VOCAB_SIZE = ALPHABET.length + 2;

const CHAR_TO_ID = new Map<string, number>();
for (let i = 0; i < ALPHABET.length; i++) CHAR_TO_ID.set(ALPHABET[i], i);

export class UnknownCharacter extends Error {
  constructor(ch: string, index: number) {
    super(
      `character ${JSON.stringify(ch)} at offset ${index} is outside the ` +
        `trace alphabet; the input is not trace text`,
    );
  }
}

/** Text to token ids, without BOS/EOS. Throws UnknownCharacter. */
export function encode(text: string): Int32Array {
  const out = new Int32Array(text.length);
  for (let i = 0; i < text.length; i++) {
    const id = CHAR_TO_ID.get(text[i]);
    if (id === undefined) throw new UnknownCharacter(text[i], i);
    out[i] = id;
  }
  return out;
}

/** Token ids back to text; BOS/EOS render as nothing. */
export function decode(ids: ArrayLike<number>): string {
  let out = "";
  for (let i = 0; i < ids.length; i++) {
    const id = ids[i];
    if (id >= 0 && id < ALPHABET.length) out += ALPHABET[id];
  }
  return out;
}

/** A document as trained on: BOS, the characters, EOS. */
export function encodeDocument(text: string): Int32Array {
  const body = encode(text);
  const out = new Int32Array(body.length + 2);
  out[0] = BOS;
  out.set(body, 1);
  out[out.length - 1] = EOS;
  return out;
}
