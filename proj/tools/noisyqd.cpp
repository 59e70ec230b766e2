// noisyqd run <config> | verify <config> | print-spec
//
// Exit codes: 0 success, 2 config error, 3 numerical failure,
// 4 verification failure, 1 anything else (I/O, internal).

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "noisyqd/noisyqd.hpp"

namespace {

int fail(int code, const char* kind, const std::string& message) {
    const noisyqd::json err = {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
    std::cerr << err.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum systems driven by Gaussian white noise"};
    app.require_subcommand(1);

    std::string run_path, verify_path;
    auto* run_cmd = app.add_subcommand("run", "Run the configured mode and write its outputs");
    run_cmd->add_option("config", run_path, "JSON run configuration")->required();
    auto* verify_cmd = app.add_subcommand("verify", "Run the verification criteria named in the config");
    verify_cmd->add_option("config", verify_path, "JSON run configuration")->required();
    auto* spec_cmd = app.add_subcommand("print-spec", "Print the resolved configuration schema");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return fail(2, "usage", e.what());
    }

    try {
        if (spec_cmd->parsed()) {
            std::cout << noisyqd::config_schema().dump(2) << '\n';
            return 0;
        }
        noisyqd::RunConfig cfg = noisyqd::load_config(run_cmd->parsed() ? run_path : verify_path);
        if (verify_cmd->parsed()) cfg.mode = noisyqd::Mode::verify;
        const auto result = noisyqd::run(cfg);
        for (const auto& f : result.files) std::cout << f.string() << '\n';
        if (!result.verification_passed) return fail(4, "verification", "one or more criteria failed; see verify_report.json");
        return 0;
    } catch (const noisyqd::ConfigError& e) {
        return fail(2, "config", e.what());
    } catch (const noisyqd::GridMismatch& e) {
        return fail(2, "config", e.what());
    } catch (const noisyqd::EmptyStateError& e) {
        return fail(3, "numerical", e.what());
    } catch (const noisyqd::NumericalError& e) {
        return fail(3, "numerical", e.what());
    } catch (const std::exception& e) {
        return fail(1, "internal", e.what());
    }
}
