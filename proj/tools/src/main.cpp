#include <string>

#include <CLI11.hpp>

#include "pddecli/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"mild-solution laboratory for delayed parabolic systems"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", suite, r0 = "2";
    int N = 1;
    double p = 1.0, q = 2.0;

    auto* solve = app.add_subcommand("solve", "solve one configured system");
    solve->add_option("--config", config_path, "run configuration (JSON)")->required();
    solve->add_option("--out", out_dir, "output directory")->required();

    auto* verify = app.add_subcommand("verify", "run an invariant suite");
    verify->add_option("--suite", suite,
                       "cocycle | duality | picard | oracles | gronwall | smoothing")
        ->required();
    verify->add_option("--config", config_path, "run configuration (JSON)")->required();

    auto* schedule = app.add_subcommand("schedule", "print the bootstrap schedule");
    schedule->add_option("--N", N, "spatial dimension")->required();
    schedule->add_option("--p", p, "starting exponent")->required();
    schedule->add_option("--q", q, "target exponent")->required();
    schedule->add_option("--r0", r0, "history integrability (real or 'inf')")->required();

    auto* study = app.add_subcommand("study", "weak-* continuous-dependence study");
    study->add_option("--config", config_path, "run configuration (JSON)")->required();
    study->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : pddecli::kExitConfig;
    }

    if (solve->parsed()) return pddecli::cmd_solve(config_path, out_dir);
    if (verify->parsed()) return pddecli::cmd_verify(suite, config_path);
    if (schedule->parsed()) return pddecli::cmd_schedule(N, p, q, r0);
    return pddecli::cmd_study(config_path, out_dir);
}
