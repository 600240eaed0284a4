export { Rng, deriveSeed } from "./rng.js";
export {
  ALPHABET,
  BOS,
  EOS,
  VOCAB_SIZE,
  UnknownCharacter,
  decode,
  encode,
  encodeDocument,
} from "./vocab.js";
export { Model, GenSession, ContextExhausted } from "./model.js";
export type { ModelConfig } from "./model.js";
export {
  SchemaMismatch,
  cutAtLastNewline,
  promptFor,
  readDataset,
  readProblems,
  writeRecords,
} from "./data.js";
export type { DatasetRecord, Problem, RolloutRecord } from "./data.js";
export {
  ToolkitError,
  genDataset,
  genProblems,
  starFilter,
  strictParseRate,
  validate,
} from "./primary.js";
export type { ValidateResult, ValidationReport } from "./primary.js";
export { encodeRecords, fittingRecords, pickDocs, runTraining, train } from "./train.js";
export type { TrainConfig, TrainCurve, TrainOutcome } from "./train.js";
export { rollout, rolloutOne } from "./rollout.js";
export type { RolloutBatch, RolloutOptions } from "./rollout.js";
export { EmptyFilteredSet, evaluate, starLoop } from "./star.js";
export type { EvalResult, IterationStats, StarConfig, StarOutcome } from "./star.js";
export { MisalignedConditions, compareConditions } from "./compare.js";
export type { CompareConfig, CompareOutcome, ConditionResult } from "./compare.js";
