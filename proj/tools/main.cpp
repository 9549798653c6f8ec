// Batch CLI for the evoflow library: runs JSON experiment configs into
// per-invocation run directories, prints kind schemas, and executes the
// built-in oracle suite. Exit codes: 0 success, 1 failed verify checks,
// 2 usage/validation errors, 3 numeric or resource errors.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "evoflow/errors.hpp"
#include "evoflow/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"exact evolutionary-dynamics experiment runner"};
    app.require_subcommand(1);

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "execute a JSON experiment config");
    run->add_option("config", config_path, "path to the config file")->required();

    std::string kind;
    CLI::App* describe =
        app.add_subcommand("describe", "print the schema and an example config for a kind");
    describe->add_option("kind", kind, "experiment kind (see `describe` with a bad name for the list)")
        ->required();

    std::string inject_fault;
    CLI::App* verify = app.add_subcommand("verify", "run the built-in oracle suite");
    verify->add_option("--inject-fault", inject_fault, "force the named check to fail")
        ->group("");  // test hook, hidden from help

    try {
        app.parse(argc, argv);

        if (run->parsed()) {
            const evoflow::RunResult result = evoflow::run_experiment(config_path);
            std::cout << result.run_dir << '\n';
            for (const std::string& artifact : result.artifacts)
                std::cout << "  " << artifact << '\n';
            return 0;
        }
        if (describe->parsed()) {
            std::cout << evoflow::describe_kind(kind);
            return 0;
        }
        return evoflow::run_verify(std::cout, inject_fault) ? 0 : 1;
    } catch (const CLI::ParseError& e) {
        // --help and friends exit 0; genuine command-line mistakes are
        // usage errors.
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const evoflow::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
