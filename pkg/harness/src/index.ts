export { blur } from "./blur.js";
export { combinedLoss, diceLoss, bceLoss, sigmoid } from "./loss.js";
export { makeLcg } from "./rng.js";
export { readGray, readMask, writeMask } from "./png.js";
export { readPromptFile, clickChannel } from "./prompts.js";
export type { PromptSet, Click } from "./prompts.js";
export { readManifest, imageFile, maskFiles, subset } from "./manifest.js";
export type { Manifest, ManifestEntry } from "./manifest.js";
export { runEngine, parseEvalReport } from "./engine.js";
export type { EvalRow } from "./engine.js";
export {
  defaultConfig,
  featureCount,
  trainStage,
  exportPredictions,
  saveCheckpoint,
  loadCheckpoint,
} from "./model.js";
export type { SegmenterConfig, TrainResult, TrainOptions, ExportOptions } from "./model.js";
export { twoStageExperiment } from "./experiment.js";
export type { ExperimentOptions, ExperimentResult } from "./experiment.js";
