#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"

#include "wavelab/acceptance.hpp"
#include "wavelab/harness.hpp"

namespace {

using namespace wavelab;

using Verb = harness::VerbOutcome (*)(const harness::Scenario&);

int run_verb(Verb verb, const std::string& scenario_file,
             const std::string& out_dir, const std::uint64_t* seed) {
    auto sc = harness::load_scenario(scenario_file);
    if (seed) sc.seed = *seed;

    auto start = std::chrono::steady_clock::now();
    auto out = verb(sc);
    double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();

    bool pass = harness::emit_run(sc, out_dir, out, wall);
    std::printf("%s %s: %s (artifacts in %s)\n",
                out.report["verb"].get<std::string>().c_str(), sc.name.c_str(),
                pass ? "pass" : "FAIL", out_dir.c_str());
    return pass ? 0 : 1;
}

int run_suite(const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto results = acceptance::run_acceptance();
    std::size_t passed = 0;
    for (const auto& r : results) {
        std::puts(acceptance::format_line(r).c_str());
        passed += r.pass;
    }
    auto summary = acceptance::summary_json(results);
    harness::write_file(std::filesystem::path(out_dir) / "acceptance.json",
                        summary.dump(2) + "\n");
    std::printf("%zu/%zu criteria passed\n", passed, results.size());
    return passed == results.size() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"wavelab: singularities of stochastic hyperbolic equations"};
    app.require_subcommand(1);

    std::string scenario_file, out_dir;
    std::uint64_t seed = 0;

    const std::pair<const char*, Verb> verbs[] = {
        {"run-flow", harness::run_flow},
        {"run-spde", harness::run_spde},
        {"run-propagation", harness::run_propagation},
        {"run-convergence", harness::run_convergence},
    };

    int rc = 0;
    for (const auto& [name, verb] : verbs) {
        auto* sub = app.add_subcommand(
            name, std::string("emit artifacts for ") + name + " of a scenario");
        sub->add_option("--scenario", scenario_file, "scenario JSON file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory")->required();
        auto* seed_opt = sub->add_option("--seed", seed,
                                         "override the scenario seed");
        sub->callback([&, verb, seed_opt] {
            rc = run_verb(verb, scenario_file, out_dir,
                          *seed_opt ? &seed : nullptr);
        });
    }

    auto* acc = app.add_subcommand("run-acceptance",
                                   "run every acceptance criterion");
    acc->add_option("--out", out_dir, "output directory")->required();
    acc->callback([&] { rc = run_suite(out_dir); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::fprintf(stderr, "wavelab: %s\n", e.what());
        return 2;
    }
    return rc;
}
