/** Trainer command line.
 *
 * make-vocab    --symforge-vocab PATH --out PATH
 * make-corpus   --count N --seed S --kind reverse-cipher|copy|reverse --out PATH
 * pretrain      --corpus PATH --vocab PATH --out CKPT [model/train flags]
 * finetune      --data PATH [--init CKPT] --vocab PATH --out CKPT [flags]
 * decode        --ckpt CKPT --problems PATH --out PATH
 * curve         --task T --train PATH --test PATH --sizes 1000,10000
 *               [--pretrained CKPT] --vocab PATH --out report.json [flags]
 */

import { writeFileSync } from "node:fs";

import { loadDataset } from "./data.js";
import { decodeAll } from "./decode.js";
import { learningCurve, writeCurveReport } from "./curve.js";
import { DESK_DEFAULTS, ModelConfig, Seq2SeqModel } from "./model.js";
import { Rng } from "./rng.js";
import { writePredictions } from "./data.js";
import { makeToyCorpus, writeToyCorpus, ToyKind } from "./toytask.js";
import {
  TRAIN_DEFAULTS,
  loadCheckpoint,
  saveCheckpoint,
  train,
  trainConfig,
} from "./train.js";
import { Vocab } from "./vocab.js";
import { toyTokens } from "./vocab.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`malformed flag ${key}`);
    }
    flags.set(key.slice(2), argv[i + 1]);
  }
  return flags;
}

function need(flags: Map<string, string>, name: string): string {
  const v = flags.get(name);
  if (v === undefined) throw new Error(`missing --${name}`);
  return v;
}

function modelConfig(flags: Map<string, string>, vocabSize: number): ModelConfig {
  return {
    embeddingDim: Number(flags.get("embedding") ?? DESK_DEFAULTS.embeddingDim),
    layerCount: Number(flags.get("layers") ?? DESK_DEFAULTS.layerCount),
    headCount: Number(flags.get("heads") ?? DESK_DEFAULTS.headCount),
    feedforwardDim: Number(flags.get("feedforward") ?? DESK_DEFAULTS.feedforwardDim),
    maxSequenceLength: Number(flags.get("max-seq") ?? DESK_DEFAULTS.maxSequenceLength),
    dropout: Number(flags.get("dropout") ?? DESK_DEFAULTS.dropout),
    vocabSize,
  };
}

function trainOverrides(flags: Map<string, string>) {
  const out: Record<string, number> = {};
  if (flags.has("lr")) out.learningRate = Number(flags.get("lr"));
  if (flags.has("epochs")) out.epochs = Number(flags.get("epochs"));
  if (flags.has("batch")) out.batchSize = Number(flags.get("batch"));
  if (flags.has("seed")) out.seed = Number(flags.get("seed"));
  return out;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  const flags = parseFlags(rest);
  const log = (line: string) => process.stderr.write(line + "\n");

  if (command === "make-vocab") {
    const base = Vocab.load(need(flags, "symforge-vocab"));
    const { source, target } = toyTokens(Number(flags.get("region") ?? 16));
    const combined = base.extended([...source, ...target]);
    combined.save(need(flags, "out"));
    log(`vocabulary of ${combined.size} tokens written`);
    return 0;
  }

  if (command === "make-corpus") {
    const rows = makeToyCorpus(
      Number(need(flags, "count")),
      Number(flags.get("seed") ?? 0),
      (flags.get("kind") ?? "reverse-cipher") as ToyKind,
    );
    writeToyCorpus(need(flags, "out"), rows);
    log(`${rows.length} corpus rows written`);
    return 0;
  }

  if (command === "pretrain" || command === "finetune") {
    const vocab = Vocab.load(need(flags, "vocab"));
    const dataPath = command === "pretrain" ? need(flags, "corpus") : need(flags, "data");
    const samples = loadDataset(dataPath, vocab);
    const cfg = trainConfig(trainOverrides(flags));
    let model: Seq2SeqModel;
    if (command === "finetune" && flags.has("init")) {
      model = loadCheckpoint(need(flags, "init")).model;
    } else {
      model = new Seq2SeqModel(modelConfig(flags, vocab.size), new Rng(cfg.seed));
    }
    const result = train(model, samples, cfg, null, log);
    saveCheckpoint(need(flags, "out"), model, vocab);
    log(`final loss ${result.finalLoss.toFixed(6)}; checkpoint saved`);
    return 0;
  }

  if (command === "decode") {
    const { model, vocab } = loadCheckpoint(need(flags, "ckpt"));
    const samples = loadDataset(need(flags, "problems"), vocab);
    const predictions = decodeAll(model, samples, vocab);
    writePredictions(need(flags, "out"), predictions);
    log(`${predictions.length} predictions written`);
    return 0;
  }

  if (command === "curve") {
    const vocab = Vocab.load(need(flags, "vocab"));
    const sizes = need(flags, "sizes").split(",").map(Number);
    const report = learningCurve({
      tasks: [
        {
          task: need(flags, "task"),
          trainFile: need(flags, "train"),
          testFile: need(flags, "test"),
        },
      ],
      sizes,
      modelConfig: modelConfig(flags, vocab.size),
      train: trainOverrides(flags),
      pretrainedCheckpoint: flags.get("pretrained") ?? null,
      vocab,
      log,
    });
    writeCurveReport(need(flags, "out"), report);
    log(`curve report written`);
    return 0;
  }

  process.stderr.write(
    "usage: make-vocab | make-corpus | pretrain | finetune | decode | curve\n",
  );
  return 1;
}

if (process.argv[1] && process.argv[1].endsWith("cli.ts")) {
  process.exit(main(process.argv.slice(2)));
} else if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
