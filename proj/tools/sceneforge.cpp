// sceneforge: command-line driver for the text-to-scene pipeline.
//
// Exit codes: 0 success, 1 validation error / bad usage, 2 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sceneforge/sceneforge.hpp"

namespace fs = std::filesystem;
using namespace sceneforge;

namespace {

struct Options {
  std::string corpus;
  std::string models;
  std::string weights;
  std::string lexicon;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t k = 4;
  std::string condition = "combo";
  int num_samples = 100;
  double l2 = 1.0;
  int max_iterations = 500;
  double tolerance = 1e-6;
  unsigned threads = 1;
  std::string ratings;
  std::string text;
  std::string template_path;
  std::string scene;
  std::string methods = "random,learned,rule,combo";
  bool allow_empty = false;
  SyntheticSpec synthetic;
};

std::uint64_t env_seed() {
  const char* v = std::getenv("SCENEFORGE_SEED");
  if (!v || !*v) return 0;
  try {
    std::size_t used = 0;
    const auto s = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument("trailing");
    return s;
  } catch (const std::exception&) {
    throw ValidationError(std::string("SCENEFORGE_SEED is not an unsigned integer: '") + v + "'");
  }
}

void write_json(const fs::path& path, const json& j) { detail::write_file(path, j.dump(2) + "\n"); }

void require_path(const std::string& p, const char* flag) {
  if (p.empty()) throw ValidationError(std::string(flag) + " is required");
  if (!fs::exists(p)) throw ValidationError(std::string(flag) + " path does not exist: " + p);
}

// --out naming a .json file means "write the main output here"; anything
// else is a directory receiving the default file names.
fs::path output_file(const std::string& out, const std::string& default_name) {
  if (out.empty()) throw ValidationError("--out is required");
  fs::path p(out);
  if (p.extension() == ".json" || p.extension() == ".svg") return p;
  return p / default_name;
}

fs::path sibling(const fs::path& main, const std::string& name) { return main.parent_path() / name; }

fs::path models_path(const Options& o) {
  if (!o.models.empty()) return o.models;
  if (!o.corpus.empty() && fs::exists(fs::path(o.corpus) / "models.json")) return fs::path(o.corpus) / "models.json";
  throw ValidationError("--models is required (or a --corpus directory containing models.json)");
}

Lexicon lexicon_for(const Options& o, const ModelDatabase& db) {
  fs::path p;
  if (!o.lexicon.empty())
    p = o.lexicon;
  else if (!o.corpus.empty() && fs::exists(fs::path(o.corpus) / "lexicon.json"))
    p = fs::path(o.corpus) / "lexicon.json";
  Lexicon lex = p.empty() ? Lexicon::defaults() : load_lexicon(p);
  lex.add_database(db);
  return lex;
}

Corpus corpus_at(const fs::path& dir) { return load_corpus(dir / "scenes.json", dir / "descriptions.json"); }

// A split directory has train/ and dev/ subdirectories; a flat one does not.
bool is_split_dir(const fs::path& dir) {
  return fs::exists(dir / "train" / "scenes.json") && fs::exists(dir / "dev" / "scenes.json");
}

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_method(item));
  if (out.empty()) throw ValidationError("--methods names no method");
  return out;
}

std::map<std::string, SceneTemplate> gold_for(const fs::path& corpus_dir) {
  const auto p = corpus_dir / "gold_templates.json";
  if (!fs::exists(p)) return {};
  return gold_templates_from_json(detail::parse_json(detail::read_file(p), p.string()), p.string());
}

json config_json(const std::string& command, const Options& o) {
  return {{"command", command},
          {"corpus", o.corpus},
          {"models", o.models},
          {"weights", o.weights},
          {"lexicon", o.lexicon},
          {"out", o.out},
          {"seed", o.seed},
          {"kDistractors", o.k},
          {"condition", o.condition},
          {"methods", o.methods},
          {"ratings", o.ratings},
          {"layout", {{"numSamples", o.num_samples}}},
          {"train",
           {{"l2", o.l2}, {"maxIterations", o.max_iterations}, {"tolerance", o.tolerance}, {"threads", o.threads}}},
          {"synthetic",
           {{"categories", o.synthetic.categories},
            {"models", o.synthetic.models},
            {"scenes", o.synthetic.scenes},
            {"noise", o.synthetic.noise}}}};
}

TrainConfig train_config(const Options& o) {
  TrainConfig c;
  c.l2_strength = o.l2;
  c.max_iterations = o.max_iterations;
  c.gradient_tolerance = o.tolerance;
  c.seed = o.seed;
  c.threads = o.threads;
  return c;
}

// ---------------------------------------------------------------------------

int cmd_gen_synthetic(const Options& o) {
  if (o.out.empty()) throw ValidationError("--out is required");
  const auto s = gen_synthetic_corpus(o.synthetic, o.seed);
  save_synthetic(s, o.out);
  write_json(fs::path(o.out) / "gen_report.json",
             {{"config", config_json("gen-synthetic", o)},
              {"scenes", s.corpus.scene_count()},
              {"descriptions", s.corpus.description_count()},
              {"models", s.db.size()}});
  std::cout << "scenes " << s.corpus.scene_count() << ", descriptions " << s.corpus.description_count()
            << ", models " << s.db.size() << "\n";
  return 0;
}

int cmd_split(const Options& o) {
  require_path(o.corpus, "--corpus");
  if (o.out.empty()) throw ValidationError("--out is required");
  const fs::path in(o.corpus), out(o.out);
  const auto corpus = corpus_at(in);
  const auto split = split_corpus(corpus, {}, o.seed, o.allow_empty);
  save_corpus(split.train, out / "train");
  save_corpus(split.dev, out / "dev");
  save_corpus(split.test, out / "test");
  for (const char* f : {"models.json", "lexicon.json", "gold_templates.json"})
    if (fs::exists(in / f)) detail::write_file(out / f, detail::read_file(in / f));
  write_json(out / "split_report.json", {{"config", config_json("split", o)},
                                         {"train", split.train.scene_count()},
                                         {"dev", split.dev.scene_count()},
                                         {"test", split.test.scene_count()}});
  std::cout << "train " << split.train.scene_count() << ", dev " << split.dev.scene_count() << ", test "
            << split.test.scene_count() << " scenes\n";
  return 0;
}

int cmd_train(const Options& o) {
  require_path(o.corpus, "--corpus");
  const fs::path dir(o.corpus);
  Corpus train_split, dev_split;
  if (is_split_dir(dir)) {
    train_split = corpus_at(dir / "train");
    dev_split = corpus_at(dir / "dev");
  } else {
    auto parts = split_corpus(corpus_at(dir), {}, o.seed);
    train_split = std::move(parts.train);
    dev_split = std::move(parts.dev);
  }
  const auto weights_path = output_file(o.out, "weights.json");
  const auto model = train_discriminator(train_split, o.k, o.seed, train_config(o));
  json report{{"config", config_json("train", o)},
              {"groups", model.groups},
              {"features", model.vocab.size()},
              {"iterations", model.result.iterations},
              {"finalLoss", model.result.final_loss},
              {"gradientNorm", model.result.gradient_norm},
              {"converged", model.result.converged},
              {"bias", model.weights.bias}};
  if (dev_split.scene_count() >= o.k + 1) {
    const auto d = score_discrimination(dev_split, o.k, o.seed, model.vocab, model.weights);
    report["devAccuracy"] = {{"full", d.full}, {"modelid_only", d.modelid_only}, {"groups", d.groups}};
    std::cout << "dev accuracy full " << d.full << ", modelid_only " << d.modelid_only << "\n";
  }
  write_json(weights_path, weights_to_json(model.vocab, model.weights));
  write_json(sibling(weights_path, "train_report.json"), report);
  std::cout << "iterations " << model.result.iterations << ", loss " << model.result.final_loss << "\n";
  return 0;
}

int cmd_discriminate(const Options& o) {
  require_path(o.corpus, "--corpus");
  require_path(o.weights, "--weights");
  const fs::path dir(o.corpus);
  const auto corpus = corpus_at(is_split_dir(dir) ? dir / "dev" : dir);
  const auto w = load_weights(o.weights);
  const auto d = score_discrimination(corpus, o.k, o.seed, w.vocab, w.weights);
  json report{{"config", config_json("discriminate", o)},
              {"groups", d.groups},
              {"accuracy", {{"full", d.full}, {"modelid_only", d.modelid_only}}}};
  if (!o.out.empty()) write_json(output_file(o.out, "discriminate_report.json"), report);
  std::cout << "full " << d.full << "\nmodelid_only " << d.modelid_only << "\n";
  return 0;
}

struct Grounded {
  ModelDatabase db;
  SceneTemplate tmpl;
};

Grounded ground_text(const Options& o) {
  if (o.text.empty()) throw ValidationError("--text is required");
  Grounded g;
  g.db = load_model_db(models_path(o));
  const Method method = parse_method(o.condition);
  const Lexicon lex = lexicon_for(o, g.db);
  std::optional<WeightTable> table;
  if (!o.weights.empty()) {
    require_path(o.weights, "--weights");
    const auto w = load_weights(o.weights);
    table.emplace(w.vocab, w.weights);
  }
  GroundingContext ctx{&g.db, table ? &*table : nullptr, &lex, {}};
  g.tmpl = build_template(method, ctx, o.text, o.seed);
  return g;
}

int cmd_ground(const Options& o) {
  const auto g = ground_text(o);
  const auto j = template_to_json(g.tmpl);
  if (!o.out.empty()) write_json(output_file(o.out, "template.json"), j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_generate(const Options& o) {
  const auto g = ground_text(o);
  LayoutConfig cfg;
  cfg.num_samples = o.num_samples;
  cfg.seed = o.seed;
  const auto r = synthesize(g.tmpl, g.db, cfg);
  const auto scene_path = output_file(o.out, "scene.json");
  write_json(scene_path, scenes_to_json({r.scene}));
  write_json(sibling(scene_path, "template.json"), template_to_json(g.tmpl));
  detail::write_file(sibling(scene_path, "scene.svg"), render_svg(r.scene, g.db));
  write_json(sibling(scene_path, "generate_report.json"), {{"config", config_json("generate", o)},
                                                           {"score", r.score},
                                                           {"degraded", r.degraded},
                                                           {"chosenSample", r.chosen_sample},
                                                           {"warnings", r.warnings}});
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "objects " << r.scene.objects.size() << ", score " << r.score << (r.degraded ? " (degraded)" : "")
            << "\n";
  return 0;
}

Scene single_scene(const std::string& path) {
  const auto scenes = load_scenes(path);
  if (scenes.size() != 1) throw ValidationError(path + " must hold exactly one scene");
  return scenes.front();
}

int cmd_asts(const Options& o) {
  require_path(o.template_path, "--template");
  require_path(o.scene, "--scene");
  const auto value = asts(load_template(o.template_path), single_scene(o.scene));
  if (!o.out.empty())
    write_json(output_file(o.out, "asts_report.json"), {{"config", config_json("asts", o)}, {"asts", value}});
  std::cout << std::setprecision(17) << value << "\n";
  return 0;
}

int cmd_eval(const Options& o) {
  require_path(o.corpus, "--corpus");
  const fs::path dir(o.corpus);
  const auto corpus = corpus_at(is_split_dir(dir) ? dir / "dev" : dir);
  const auto methods = parse_methods(o.methods);
  const auto db = load_model_db(models_path(o));
  const auto lex = lexicon_for(o, db);
  std::optional<WeightTable> table;
  if (!o.weights.empty()) {
    require_path(o.weights, "--weights");
    const auto w = load_weights(o.weights);
    table.emplace(w.vocab, w.weights);
  }
  GroundingContext ctx{&db, table ? &*table : nullptr, &lex, {}};
  const auto ev = evaluate_methods(corpus, methods, ctx, gold_for(dir), o.seed);
  json report = evaluation_json(ev);
  report["config"] = config_json("eval", o);
  if (!o.ratings.empty()) {
    require_path(o.ratings, "--ratings");
    report["correlation"] = correlation_block(ev, load_ratings(o.ratings));
  }
  write_json(output_file(o.out, "eval_report.json"), report);
  for (std::size_t m = 0; m < methods.size(); ++m)
    std::cout << to_string(methods[m]) << "\t" << ev.means[m] << "\n";
  return 0;
}

int cmd_render(const Options& o) {
  require_path(o.scene, "--scene");
  const auto db = load_model_db(models_path(o));
  detail::write_file(output_file(o.out, "scene.svg"), render_svg(single_scene(o.scene), db));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"sceneforge: text to 3D scene templates, layout and evaluation"};
  app.require_subcommand(1);

  bool seed_given = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "random seed (default: $SCENEFORGE_SEED or 0)")
        ->each([&](const std::string&) { seed_given = true; });
    sub->add_option("--out", o.out, "output file or directory");
  };
  auto add_grounding = [&](CLI::App* sub) {
    sub->add_option("--text", o.text, "description text");
    sub->add_option("--models", o.models, "models.json");
    sub->add_option("--corpus", o.corpus, "corpus directory (models.json, lexicon.json)");
    sub->add_option("--weights", o.weights, "weights.json");
    sub->add_option("--lexicon", o.lexicon, "lexicon.json");
    sub->add_option("--condition", o.condition, "random, learned, rule or combo");
  };

  auto* gen = app.add_subcommand("gen-synthetic", "write a synthetic corpus");
  add_common(gen);
  gen->add_option("--scenes", o.synthetic.scenes);
  gen->add_option("--categories", o.synthetic.categories);
  gen->add_option("--model-count", o.synthetic.models);
  gen->add_option("--noise", o.synthetic.noise);

  auto* split = app.add_subcommand("split", "70/15/15 split by scene");
  add_common(split);
  split->add_option("--corpus", o.corpus, "corpus directory");
  split->add_flag("--allow-empty", o.allow_empty, "permit empty splits for tiny corpora");

  auto* train = app.add_subcommand("train", "fit grounding weights on the discrimination task");
  add_common(train);
  train->add_option("--corpus", o.corpus, "corpus or split directory");
  train->add_option("--k-distractors", o.k);
  train->add_option("--l2", o.l2);
  train->add_option("--max-iter", o.max_iterations);
  train->add_option("--tol", o.tolerance);
  train->add_option("--threads", o.threads);

  auto* disc = app.add_subcommand("discriminate", "held-out discrimination accuracy");
  add_common(disc);
  disc->add_option("--corpus", o.corpus, "corpus or split directory");
  disc->add_option("--weights", o.weights);
  disc->add_option("--k-distractors", o.k);

  auto* ground = app.add_subcommand("ground", "build a scene template from text");
  add_common(ground);
  add_grounding(ground);

  auto* generate = app.add_subcommand("generate", "text to laid-out scene");
  add_common(generate);
  add_grounding(generate);
  generate->add_option("--num-samples", o.num_samples);

  auto* ast = app.add_subcommand("asts", "aligned scene template similarity");
  add_common(ast);
  ast->add_option("--template", o.template_path);
  ast->add_option("--scene", o.scene);

  auto* ev = app.add_subcommand("eval", "mean ASTS per method on the dev split");
  add_common(ev);
  ev->add_option("--corpus", o.corpus, "corpus or split directory");
  ev->add_option("--models", o.models);
  ev->add_option("--weights", o.weights);
  ev->add_option("--lexicon", o.lexicon);
  ev->add_option("--methods", o.methods, "comma-separated methods");
  ev->add_option("--ratings", o.ratings, "ratings.json with {descriptionId, rating[, method]} rows");

  auto* render = app.add_subcommand("render", "top-down SVG of a scene");
  add_common(render);
  render->add_option("--scene", o.scene);
  render->add_option("--models", o.models);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc != 0) std::cerr << app.help();
    return rc == 0 ? 0 : 1;
  }

  try {
    if (!seed_given) o.seed = env_seed();
    auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "gen-synthetic") return cmd_gen_synthetic(o);
    if (name == "split") return cmd_split(o);
    if (name == "train") return cmd_train(o);
    if (name == "discriminate") return cmd_discriminate(o);
    if (name == "ground") return cmd_ground(o);
    if (name == "generate") return cmd_generate(o);
    if (name == "asts") return cmd_asts(o);
    if (name == "eval") return cmd_eval(o);
    if (name == "render") return cmd_render(o);
    std::cerr << app.help();
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
}
