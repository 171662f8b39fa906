#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "wicknorm/experiments.hpp"

namespace fs = std::filesystem;
using namespace wicknorm;

namespace {

struct Invocation {
    CLI::App* sub = nullptr;
    const Experiment* exp = nullptr;
    std::map<std::string, std::string> flags;
};

int run(const Invocation& inv, const std::string& config_path, std::string out_dir) {
    std::map<std::string, std::string> file;
    if (!config_path.empty()) {
        std::ifstream is(config_path);
        if (!is) throw ConfigError("cannot read config file '" + config_path + "'");
        file = parse_config_text(is);
    }
    const Config cfg = resolve_config(*inv.exp, file, inv.flags);
    const ExperimentResult r = inv.exp->run(cfg);

    if (out_dir.empty()) {
        const char* env = std::getenv("WICKNORM_OUT");
        out_dir = env && *env ? env : ".";
    }
    fs::create_directories(out_dir);
    const fs::path base = fs::path(out_dir) / inv.exp->name;
    {
        std::ofstream csv(base.string() + ".csv");
        write_csv_file(csv, *inv.exp, cfg, r.table);
    }
    {
        std::ofstream js(base.string() + ".json");
        js << summary_json(*inv.exp, cfg, r).dump(2) << '\n';
    }
    r.table.write(std::cout);
    std::cout << (r.passed ? "PASS " : "FAIL ") << inv.exp->name << "  (" << base.string() << ".{csv,json})\n";
    return r.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wicknorm: experiments on weighted kernel-sequence norms"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    app.add_option("--config", config_path, "key=value file; flags override it");
    app.add_option("--out", out_dir, "output directory (default: $WICKNORM_OUT or .)");
    app.set_version_flag("--version", std::string(version));

    std::vector<Invocation> invs;
    invs.reserve(experiments().size());
    for (const auto& e : experiments()) {
        Invocation inv;
        inv.exp = &e;
        inv.sub = app.add_subcommand(e.name, e.description);
        invs.push_back(std::move(inv));
    }
    for (auto& inv : invs)
        for (const auto& p : inv.exp->params) {
            auto* opt = inv.sub->add_option_function<std::string>(
                "--" + p.name, [&inv, name = p.name](const std::string& v) { inv.flags[name] = v; },
                p.help.empty() ? "default " + p.default_value : p.help + " (default " + p.default_value + ")");
            opt->allow_extra_args(false);
        }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    for (const auto& inv : invs) {
        if (!inv.sub->parsed()) continue;
        try {
            return run(inv, config_path, out_dir);
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << '\n';
        } catch (const PreconditionError& e) {
            std::cerr << "precondition violated: " << e.what() << '\n';
        } catch (const DomainError& e) {
            std::cerr << "domain error: " << e.what() << '\n';
        } catch (const UnsupportedScale& e) {
            std::cerr << "unsupported scale: " << e.what() << '\n';
        } catch (const UnsupportedFamily& e) {
            std::cerr << "unsupported family: " << e.what() << '\n';
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
        }
        return 2;
    }
    return 2;
}
