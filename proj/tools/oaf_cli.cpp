#include <CLI11.hpp>

#include <array>
#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "oaf/errors.hpp"
#include "oaf/io.hpp"
#include "oaf/metrics.hpp"
#include "oaf/phantom.hpp"
#include "oaf/pipeline.hpp"

namespace {

struct PhantomArgs {
  std::string out;
  std::vector<int> dims{64, 64, 8};
  int layers = 6;
  std::uint64_t seed = 0;
  double noise = 0.0;
  double speckle = 0.0;
  double amplitude = 2.0;
  int modes = 2;
};

struct TrainArgs {
  std::string volume;
  std::string labels;
  std::string out;
  int k = 8;
  std::uint64_t seed = 0;
  oaf::MeanKind mean = oaf::MeanKind::stein;
};

struct SegmentArgs {
  std::string volume;
  std::string dict;
  std::string out;
  bool ordered = true;
  oaf::FlowConfig flow;
  std::string distances;
  std::string scores;
};

struct EvaluateArgs {
  std::string pred;
  std::string truth;
  std::string report;
};

int run_phantom(const PhantomArgs& args) {
  oaf::PhantomConfig config;
  config.dims = {args.dims[0], args.dims[1], args.dims[2]};
  config.layer_count = args.layers;
  config.seed = args.seed;
  config.noise_sigma = args.noise;
  config.speckle_sigma = args.speckle;
  config.amplitude = args.amplitude;
  config.modes = args.modes;
  auto [volume, labels] = oaf::generate_phantom(config);
  oaf::save_volume(args.out, volume);
  oaf::save_labels(args.out, labels, true);
  std::cout << "phantom: wrote " << volume.voxels.size() << " voxels, "
            << static_cast<int>(labels.layer_count) << " layers\n";
  return 0;
}

int run_train(const TrainArgs& args) {
  auto volume = oaf::load_volume(args.volume);
  auto labels = oaf::load_labels(args.labels);
  oaf::TrainConfig config;
  config.prototypes_per_layer = args.k;
  config.seed = args.seed;
  config.mean_kind = args.mean;
  auto dict = oaf::train_dictionary(volume, labels, config);
  oaf::save_dictionary(args.out, dict);
  std::cout << "train: wrote " << dict.layer_count << " layers x " << args.k
            << " prototypes (dim " << dict.dim << ")\n";
  return 0;
}

int run_segment(const SegmentArgs& args) {
  auto volume = oaf::load_volume(args.volume);
  const std::array<int, 3> dims{volume.depth, volume.na, volume.nb};

  oaf::SegmentationResult result;
  if (!args.distances.empty()) {
    result = oaf::segment_distances(dims, oaf::load_distances(args.distances),
                                    args.flow, args.ordered);
  } else if (!args.scores.empty()) {
    result = oaf::segment_distances(
        dims, oaf::ingest_scores(oaf::load_distances(args.scores)), args.flow,
        args.ordered);
  } else {
    if (args.dict.empty())
      throw oaf::ConfigError(
          "segment: need --dict unless --distances or --scores is given");
    auto dict = oaf::load_dictionary(args.dict);
    result = oaf::segment_volume(volume, dict, oaf::FeatureConfig{}, args.flow,
                                 args.ordered);
  }

  oaf::save_labels(args.out, result.labels, result.trace.converged);
  const auto& last = result.trace.steps.back();
  std::cout << "segment: " << last.step << " steps, mean entropy "
            << last.mean_entropy << ", " << result.runtime_s << " s"
            << (result.trace.converged ? "" : " (not converged)") << "\n";
  return result.trace.converged ? 0 : 3;
}

int run_evaluate(const EvaluateArgs& args) {
  bool converged = true;
  auto pred = oaf::load_labels(args.pred, &converged);
  auto truth = oaf::load_labels(args.truth);
  auto report = oaf::evaluate_labels(pred, truth);
  report.converged = converged;
  oaf::save_report(args.report, report);
  std::cout << "evaluate: dice";
  for (double d : report.per_layer_dice) std::cout << " " << d;
  std::cout << ", violations " << report.violations << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ordered assignment flow for layered volume segmentation"};
  app.require_subcommand(1);

  PhantomArgs phantom;
  auto* p = app.add_subcommand("phantom", "Generate a synthetic layered volume");
  p->add_option("--out", phantom.out, "Output base path")->required();
  p->add_option("--dims", phantom.dims, "Depth,A-scans,B-scans")
      ->delimiter(',')
      ->expected(3);
  p->add_option("--layers", phantom.layers, "Number of layers");
  p->add_option("--seed", phantom.seed, "RNG seed")->required();
  p->add_option("--noise", phantom.noise, "Additive noise sigma");
  p->add_option("--speckle", phantom.speckle, "Multiplicative speckle sigma");
  p->add_option("--amplitude", phantom.amplitude,
                "Boundary undulation amplitude in voxels");
  p->add_option("--modes", phantom.modes, "Sinusoidal modes per boundary");

  TrainArgs train;
  const std::map<std::string, oaf::MeanKind> mean_names{
      {"stein", oaf::MeanKind::stein},
      {"riemannian", oaf::MeanKind::riemannian},
      {"logeuclid", oaf::MeanKind::logeuclid}};
  auto* t = app.add_subcommand("train", "Fit per-layer prototype dictionaries");
  t->add_option("--volume", train.volume, "Training volume")->required();
  t->add_option("--labels", train.labels, "Ground-truth labels")->required();
  t->add_option("--out", train.out, "Dictionary output path")->required();
  t->add_option("--k", train.k, "Prototypes per layer")->required();
  t->add_option("--seed", train.seed, "RNG seed")->required();
  t->add_option("--mean", train.mean, "Prototype mean")
      ->transform(CLI::CheckedTransformer(mean_names, CLI::ignore_case));

  SegmentArgs segment;
  auto* s = app.add_subcommand("segment", "Label a volume with the flow");
  s->add_option("--volume", segment.volume, "Input volume")->required();
  s->add_option("--dict", segment.dict, "Prototype dictionary");
  s->add_option("--out", segment.out, "Label output base path")->required();
  s->add_flag("--ordered,!--no-ordered", segment.ordered,
              "Enforce layer ordering (default on)");
  s->add_option("--rho", segment.flow.rho, "Likelihood scale");
  s->add_option("--gamma", segment.flow.gamma, "Ordering penalty smoothing");
  s->add_option("--step", segment.flow.step, "Euler step length");
  s->add_option("--window", segment.flow.window,
                "Ordering pair window (0 = all pairs)");
  s->add_option("--entropy-threshold", segment.flow.entropy_threshold,
                "Stop when mean entropy falls below this");
  s->add_option("--ordering-weight", segment.flow.ordering_weight,
                "Ordering gradient scale (<= 0 = auto pair normalization)");
  auto* dopt = s->add_option("--distances", segment.distances,
                             "Precomputed distance matrix, skips features");
  auto* sopt = s->add_option("--scores", segment.scores,
                             "Class score matrix, ingested via sign flip");
  dopt->excludes(sopt);

  EvaluateArgs evaluate;
  auto* e = app.add_subcommand("evaluate", "Compare labels against truth");
  e->add_option("--pred", evaluate.pred, "Predicted labels")->required();
  e->add_option("--truth", evaluate.truth, "Ground-truth labels")->required();
  e->add_option("--report", evaluate.report, "Report JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << err.what() << "\n\n" << app.help() << std::flush;
    return 2;
  }

  try {
    if (p->parsed()) return run_phantom(phantom);
    if (t->parsed()) return run_train(train);
    if (s->parsed()) return run_segment(segment);
    return run_evaluate(evaluate);
  } catch (const oaf::ConvergenceError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
}
