/** Sampling trajectories from a trained model, one per problem. */

import { cutAtLastNewline, Problem, promptFor, RolloutRecord } from "./data.js";
import { ContextExhausted, Model } from "./model.js";
import { deriveSeed, Rng } from "./rng.js";
import { BOS, decode, encode, EOS } from "./vocab.js";

export interface RolloutOptions {
  temperature: number;
  seed: number;
  /** Cap on generated characters; the context length still binds first. */
  maxNewTokens?: number;
}

export interface RolloutBatch {
  records: RolloutRecord[];
  meta: {
    temperature: number;
    seed: number;
    maxNewTokens: number;
    truncatedCount: number;
  };
}

/** Generate one trajectory; truncation (budget or context) is flagged. */
export function rolloutOne(
  model: Model,
  problem: Problem,
  opts: { temperature: number; maxNewTokens: number; rng: Rng },
): { text: string; truncated: boolean } {
  const prompt = promptFor(problem);
  const session = model.session();
  const ids = encode(prompt);
  session.feed(BOS);
  for (const id of ids) {
    if (session.remaining === 0) break;
    session.feed(id);
  }

  const generated: number[] = [];
  let truncated = false;
  for (;;) {
    if (generated.length >= opts.maxNewTokens || session.remaining === 0) {
      truncated = true;
      break;
    }
    const next = session.sample(opts.temperature, opts.rng);
    if (next === EOS) break;
    generated.push(next);
    try {
      session.feed(next);
    } catch (err) {
      if (err instanceof ContextExhausted) {
        truncated = true;
        break;
      }
      throw err;
    }
  }

  let text = prompt + decode(generated);
  if (truncated) {
    // drop any half-written line so the trace stays line-shaped
    const cut = cutAtLastNewline(text);
    text = cut === null || cut.length < prompt.length ? prompt : cut;
  }
  return { text, truncated };
}

/** One sampled trajectory per problem. RNG streams are keyed by problem
 * identity (plus an occurrence counter for repeats), so a problem's sample
 * does not change when the batch around it does. */
export function rollout(
  model: Model,
  problems: Problem[],
  opts: RolloutOptions,
): RolloutBatch {
  const maxNew = opts.maxNewTokens ?? model.cfg.ctx;
  const records: RolloutRecord[] = [];
  const seen = new Map<string, number>();
  let truncatedCount = 0;
  for (let i = 0; i < problems.length; i++) {
    const key = `${problems[i].target}:${problems[i].nums.join(",")}`;
    const occurrence = seen.get(key) ?? 0;
    seen.set(key, occurrence + 1);
    const rng = new Rng(deriveSeed(opts.seed, "rollout", key, occurrence));
    const { text, truncated } = rolloutOne(model, problems[i], {
      temperature: opts.temperature,
      maxNewTokens: maxNew,
      rng,
    });
    if (truncated) truncatedCount += 1;
    records.push({
      ...problems[i],
      trajectory: text,
      strategy: "model",
      correct: false,
      states_explored: 0,
      seed: opts.seed,
      temperature: opts.temperature,
      truncated,
    });
  }
  return {
    records,
    meta: {
      temperature: opts.temperature,
      seed: opts.seed,
      maxNewTokens: maxNew,
      truncatedCount,
    },
  };
}
