#include <vector>

#include "CLI11.hpp"

#include "hetnet/report.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hetnet: heteroclinic network laboratory"};
  app.require_subcommand(1);

  hetnet::RunConfig cfg;
  struct Bind {
    CLI::App* sub;
    hetnet::Command cmd;
  };
  std::vector<Bind> binds;

  auto outputs = [&cfg](CLI::App* s) {
    s->add_option("--out-json", cfg.out_json, "write the JSON report artifact to this path");
    s->add_option("--out-csv", cfg.out_csv, "write the CSV artifact to this path");
  };
  auto sampling = [&cfg](CLI::App* s) {
    s->add_option("--n", cfg.n, "sample count (default 1000000; channel: config value)");
    s->add_option("--seed", cfg.seed, "top-level RNG seed");
    s->add_option("--workers", cfg.workers, "worker threads (never changes results)");
  };

  {
    auto* s = app.add_subcommand("validate", "check H1-H4 and print per-node constants");
    s->add_option("input", cfg.input, "network or GLV config (JSON)")->required();
    outputs(s);
    binds.push_back({s, hetnet::Command::Validate});
  }
  {
    auto* s = app.add_subcommand("flight", "time of flight and exit direction for one point");
    s->add_option("--lambdas", cfg.lambdas, "expanding eigenvalues, descending")
        ->delimiter(',')
        ->required();
    s->add_option("--x", cfg.x, "expanding coordinates")->delimiter(',')->required();
    outputs(s);
    binds.push_back({s, hetnet::Command::Flight});
  }
  {
    auto* s = app.add_subcommand("transit", "apply one leg of the section-to-section map");
    s->add_option("input", cfg.input, "network config (JSON)")->required();
    s->add_option("--node", cfg.node, "source node (default: first principal node)");
    s->add_option("--x", cfg.x, "expanding coordinates")->delimiter(',')->required();
    s->add_option("--y", cfg.y, "stable direction (normalized if needed)")
        ->delimiter(',')
        ->required();
    outputs(s);
    binds.push_back({s, hetnet::Command::Transit});
  }
  {
    auto* s = app.add_subcommand("wedge", "wedge defect and membership for one point");
    s->add_option("--lambdas", cfg.lambdas, "expanding eigenvalues, descending")
        ->delimiter(',')
        ->required();
    s->add_option("--x", cfg.x, "expanding coordinates")->delimiter(',')->required();
    s->add_option("--eps", cfg.eps, "wedge width (default 0.5)");
    outputs(s);
    binds.push_back({s, hetnet::Command::Wedge});
  }
  {
    auto* s = app.add_subcommand("measure", "Monte Carlo wedge-complement ratios per node");
    s->add_option("input", cfg.input, "network or GLV config (JSON)")->required();
    s->add_option("--node", cfg.node, "single node (default: all principal nodes)");
    s->add_option("--eps", cfg.eps, "wedge width (default 0.5)");
    s->add_option("--delta", cfg.delta, "ball radius (default 0.01)");
    sampling(s);
    outputs(s);
    binds.push_back({s, hetnet::Command::Measure});
  }
  {
    auto* s = app.add_subcommand("scaling", "ratio-vs-delta slope study for one node");
    s->add_option("input", cfg.input, "network or GLV config (JSON)")->required();
    s->add_option("--node", cfg.node, "node (default: first principal node with u >= 2)");
    s->add_option("--eps", cfg.eps, "wedge width (default 0.5)");
    s->add_option("--deltas", cfg.deltas,
                  "decreasing ball radii (default 0.02,0.01,0.005,0.0025)")
        ->delimiter(',');
    sampling(s);
    outputs(s);
    binds.push_back({s, hetnet::Command::Scaling});
  }
  {
    auto* s = app.add_subcommand("omega", "iterate the return map and report contraction");
    s->add_option("input", cfg.input, "network or GLV config (JSON)")->required();
    s->add_option("--x", cfg.x, "start expanding coordinates")->delimiter(',');
    s->add_option("--y", cfg.y, "start stable direction")->delimiter(',');
    s->add_option("--norm", cfg.norm, "start |x| along e1 when --x absent (default 0.1)");
    s->add_option("--loops", cfg.loops, "circuits to run (default 8)");
    outputs(s);
    binds.push_back({s, hetnet::Command::Omega});
  }
  {
    auto* s = app.add_subcommand("glv-sim", "integrate a GLV trajectory and its itinerary");
    s->add_option("input", cfg.input, "GLV config (JSON)")->required();
    s->add_option("--x0", cfg.x0, "initial state")->delimiter(',')->required();
    s->add_option("--t-max", cfg.t_max, "integration horizon (default config/100)");
    s->add_option("--eps", cfg.eps, "itinerary ball radius (default config/0.2)");
    outputs(s);
    binds.push_back({s, hetnet::Command::GlvSim});
  }
  {
    auto* s = app.add_subcommand("channel", "fraction of box samples following the cycle");
    s->add_option("input", cfg.input, "GLV config with an experiment block")->required();
    s->add_option("--eps", cfg.eps, "ball radius override");
    s->add_option("--delta", cfg.delta, "tube radius override");
    s->add_option("--t-max", cfg.t_max, "horizon override");
    s->add_option("--box-scale", cfg.box_scale, "rescale the sampling box about its center");
    s->add_option("--threshold", cfg.threshold, "fraction counted as evidence (default 0.9)");
    sampling(s);
    outputs(s);
    binds.push_back({s, hetnet::Command::Channel});
  }
  {
    auto* s = app.add_subcommand("perturb", "re-run the channel under random perturbations");
    s->add_option("input", cfg.input, "GLV config with an experiment block")->required();
    s->add_option("--magnitude", cfg.magnitude, "entrywise perturbation size (default 1e-3)");
    s->add_option("--count", cfg.count, "number of perturbations (default 10)");
    s->add_option("--eps", cfg.eps, "ball radius override");
    s->add_option("--delta", cfg.delta, "tube radius override");
    s->add_option("--t-max", cfg.t_max, "horizon override");
    s->add_option("--threshold", cfg.threshold, "fraction counted as evidence (default 0.9)");
    sampling(s);
    outputs(s);
    binds.push_back({s, hetnet::Command::Perturb});
  }
  {
    auto* s = app.add_subcommand("verdict", "merge report artifacts into one summary");
    s->add_option("inputs", cfg.inputs, "artifact JSON paths")->required();
    s->add_option("--out-json", cfg.out_json, "write the merged summary to this path");
    binds.push_back({s, hetnet::Command::Verdict});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  for (const auto& b : binds) {
    if (b.sub->parsed()) {
      cfg.command = b.cmd;
      if (auto* o = b.sub->get_option_no_throw("--seed")) cfg.has_seed = o->count() > 0;
    }
  }
  return hetnet::run(cfg);
}
