// bbs-ghd: command-line driver for the box-ball library.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <new>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "bbs/bbs.hpp"

namespace {

using bbs::io::json;

const char* kVersion = BBS_GHD_VERSION;

struct Manifest {
    std::string command;
    std::vector<std::string> inputs;
    json params = json::object();
    std::string output;
    std::string format;

    json to_json() const {
        return {{"command", command}, {"inputs", inputs}, {"params", params}, {"output", output}, {"format", format}};
    }
};

void emit(const Manifest& m, const std::string& data) {
    if (m.output.empty() || m.output == "-") std::cout << data << std::flush;
    else bbs::io::write_file(m.output, data);
}

void emit_json(const Manifest& m, json payload) {
    json doc{{"manifest", m.to_json()}, {"version", kVersion}};
    doc.update(payload);
    emit(m, doc.dump(2) + "\n");
}

std::string csv_preamble(const Manifest& m) {
    bbs::io::Csv c;
    c.comment("manifest: " + m.to_json().dump());
    c.comment(std::string("version: bbs-ghd ") + kVersion);
    return c.str();
}

bbs::BallConfig read_config(const std::string& path) { return bbs::io::config_from_text(bbs::io::read_file(path)); }

json read_json(const std::string& path, const std::string& what) { return bbs::io::parse_json(bbs::io::read_file(path), what); }

json config_payload(const bbs::BallConfig& c) {
    return {{"window", c.window()}, {"config", c.to_string()}, {"balls", c.ball_sites()}};
}

void check_format(Manifest& m, std::initializer_list<const char*> allowed) {
    if (m.format.empty()) m.format = *allowed.begin();
    for (const char* a : allowed)
        if (m.format == a) return;
    throw bbs::schema_error("unsupported --format '" + m.format + "' for " + m.command);
}

unsigned thread_cap() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("BBS_GHD_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) throw bbs::schema_error("BBS_GHD_THREADS must be a positive integer");
        n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

// ---------------------------------------------------------------- commands

void run_evolve(Manifest& m, std::int64_t steps) {
    check_format(m, {"text", "json"});
    m.params["steps"] = steps;
    const auto out = bbs::evolve(read_config(m.inputs.at(0)), steps);
    if (m.format == "text") emit(m, bbs::io::config_to_text(out));
    else emit_json(m, config_payload(out));
}

void run_decompose(Manifest& m) {
    check_format(m, {"json"});
    const auto config = read_config(m.inputs.at(0));
    const auto path = bbs::carrier(config);
    const auto marks = bbs::decompose(config);
    const auto profile = bbs::slot_profile(marks, path);
    const auto slots = bbs::slot_decompose(marks, profile);

    json solitons = json::array();
    for (const auto& s : marks.solitons) solitons.push_back({{"size", s.size}, {"sites", s.sites}});
    json starts = json::array();
    for (int i = 1; i <= marks.max_size(); ++i) starts.push_back(marks.starts(i));
    json nu = json::array();
    for (int v : profile.nu) nu.push_back(v == bbs::SlotProfile::kRecord ? json(nullptr) : json(v));

    json payload = bbs::io::to_json(slots);
    payload["window"] = config.window();
    payload["solitons"] = solitons;
    payload["starts"] = starts;
    payload["nu"] = nu;
    payload["S"] = profile.S;
    emit_json(m, payload);
}

void run_reconstruct(Manifest& m) {
    check_format(m, {"text", "json"});
    const auto doc = read_json(m.inputs.at(0), "slot decomposition");
    auto out = bbs::reconstruct(bbs::io::slots_from_json(doc));
    if (doc.contains("window")) {
        const auto w = bbs::io::get<bbs::Site>(doc, "window", "slot decomposition");
        if (w < out.window()) throw bbs::schema_error("reconstruct: 'window' is shorter than the reconstructed configuration");
        out = out.padded_to(w);
    }
    if (m.format == "text") emit(m, bbs::io::config_to_text(out));
    else emit_json(m, config_payload(out));
}

void run_slots_shift(Manifest& m, std::int64_t steps) {
    check_format(m, {"json"});
    m.params["steps"] = steps;
    const auto doc = read_json(m.inputs.at(0), "slot decomposition");
    emit_json(m, bbs::io::to_json(bbs::shift_slots(bbs::io::slots_from_json(doc), steps)));
}

void run_flow(Manifest& m, double t, double du, double umax) {
    check_format(m, {"csv"});
    m.params["t"] = t;
    std::string out = csv_preamble(m);
    bbs::io::Csv c;
    if (m.params.value("input_kind", "") == "density") {
        const auto rho0 = bbs::io::density_from_json(read_json(m.inputs.at(0), "density profile"));
        const auto rho = bbs::flow_density(rho0, t);
        const auto part = bbs::particle_density(rho);
        std::vector<std::string> cols{"u"};
        for (int i = 1; i <= rho.sizes(); ++i) cols.push_back("rho_" + std::to_string(i));
        cols.push_back("rho_particle");
        c.header(cols);
        for (std::size_t k = 0; k < rho.nodes(); ++k) {
            std::vector<double> row{rho.node(k)};
            for (int i = 1; i <= rho.sizes(); ++i) row.push_back(rho.at(i, k));
            row.push_back(part.at(1, k));
            c.row(row);
        }
    } else {
        if (!(du > 0.0)) throw bbs::schema_error("flow: --du must be positive");
        const auto psi = bbs::flow(bbs::io::profile_from_json(read_json(m.inputs.at(0), "integrated profile")), t);
        if (umax < 0.0) {
            umax = 1.0;
            for (const auto& f : psi.psi) umax = std::max(umax, f.last_knot());
        }
        m.params["du"] = du;
        m.params["umax"] = umax;
        out = csv_preamble(m);
        std::vector<std::string> cols{"u"};
        for (int i = 1; i <= psi.sizes(); ++i) cols.push_back("psi_" + std::to_string(i));
        c.header(cols);
        const auto n = static_cast<std::int64_t>(std::ceil(umax / du - 1e-9));
        for (std::int64_t k = 0; k <= n; ++k) {
            const double u = std::min(umax, static_cast<double>(k) * du);
            std::vector<double> row{u};
            for (const auto& f : psi.psi) row.push_back(f(u));
            c.row(row);
        }
    }
    emit(m, out + c.str());
}

void run_speeds(Manifest& m, const std::vector<double>& rho) {
    check_format(m, {"json"});
    m.params["rho"] = rho;
    const auto r = bbs::effective_speeds(rho);
    emit_json(m, {{"rho", rho},
                  {"v_eff", r.v_eff},
                  {"det", r.det},
                  {"det_lower_bound", r.det_lower_bound},
                  {"certificate", r.det >= r.det_lower_bound},
                  {"fixed_point_residual", r.fixed_point_residual},
                  {"matrix_residual", r.matrix_residual}});
}

void run_pde_check(Manifest& m, double t, double h, double delta) {
    check_format(m, {"json"});
    m.params["t"] = t;
    m.params["h"] = h;
    m.params["delta"] = delta;
    const auto rho0 = bbs::io::density_from_json(read_json(m.inputs.at(0), "density profile"));
    const auto r = bbs::pde_residual(rho0, t, h, delta);
    bool within = true;
    for (std::size_t i = 0; i < r.effective.size(); ++i) within = within && r.effective[i] <= r.effective_bound[i];
    emit_json(m, {{"rho_level", r.rho_level},
                  {"psi_level", r.psi_level},
                  {"effective", r.effective},
                  {"effective_bound", r.effective_bound},
                  {"effective_within_bound", within},
                  {"particle_flux", r.particle_flux},
                  {"max_rho_level", r.max_rho()},
                  {"max_psi_level", r.max_psi()},
                  {"max_effective", r.max_effective()}});
}

void run_convergence(Manifest& m, const std::vector<std::int64_t>& N, const std::vector<double>& times, double u0, int trials,
                     std::uint64_t seed, std::int64_t dual_steps) {
    check_format(m, {"csv"});
    m.params["N"] = N;
    m.params["t"] = times;
    m.params["u0"] = u0;
    m.params["trials"] = trials;
    m.params["seed"] = seed;
    m.params["dual_check_steps"] = dual_steps;

    auto spec = bbs::io::rates_from_json(read_json(m.inputs.at(0), "slot rates"));
    spec.seed = seed;
    bbs::SweepOptions opt;
    opt.N_list = N;
    opt.times = times;
    opt.u0 = u0;
    opt.trials = trials;
    opt.threads = thread_cap();
    opt.dual_check_steps = dual_steps;
    const auto rows = bbs::convergence_sweep(spec, opt);

    bbs::io::Csv c;
    c.header({"N", "size_i", "trial", "t", "sup_error", "seed"});
    for (const auto& r : rows) c.row(r.N, r.size, r.trial, r.t, r.sup_error, r.seed);
    emit(m, csv_preamble(m) + c.str());
}

void fail(bbs::ErrorKind kind, const std::string& code, const std::string& message) {
    const char* name = kind == bbs::ErrorKind::schema ? "schema" : kind == bbs::ErrorKind::domain ? "domain" : "internal";
    json e{{"error", {{"kind", name}, {"code", code}, {"message", message}}}};
    std::cerr << e.dump() << std::endl;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Box-ball system: soliton decomposition, scattering and hydrodynamic flow"};
    app.set_version_flag("--version", std::string("bbs-ghd ") + kVersion);
    app.require_subcommand(1);

    Manifest m;
    std::string input, output;
    std::int64_t steps = 0;
    double t = 0.0, h = 0.01, delta = 0.01, du = 0.01, umax = -1.0, u0 = 1.0;
    int trials = 1;
    std::uint64_t seed = 0;
    std::int64_t dual_steps = 1000;
    std::vector<double> rho, times;
    std::vector<std::int64_t> Ns;
    std::string format;
    std::string profile_path, density_path;

    auto add_io = [&](CLI::App* sub, const char* what) {
        sub->add_option("input,--input,-i", input, what)->required()->check(CLI::ExistingFile);
        sub->add_option("--out,-o", output, "output file (default: stdout)");
        sub->add_option("--format", format, "output format");
    };

    auto* evolve = app.add_subcommand("evolve", "run the carrier dynamics for a number of steps");
    add_io(evolve, "configuration text file");
    evolve->add_option("--steps,-k", steps, "number of time steps")->required();

    auto* decompose = app.add_subcommand("decompose", "soliton and slot decomposition of a configuration");
    add_io(decompose, "configuration text file");

    auto* reconstruct = app.add_subcommand("reconstruct", "rebuild a configuration from a slot decomposition");
    add_io(reconstruct, "slot decomposition JSON");

    auto* shift = app.add_subcommand("slots-shift", "apply the linear slot dynamics");
    add_io(shift, "slot decomposition JSON");
    shift->add_option("--steps,-k", steps, "number of time steps")->required();

    auto* flow = app.add_subcommand("flow", "hydrodynamic flow of an integrated profile or a density");
    auto* src = flow->add_option_group("source");
    src->add_option("--profile", profile_path, "integrated profile JSON")->check(CLI::ExistingFile);
    src->add_option("--density", density_path, "density profile JSON")->check(CLI::ExistingFile);
    src->require_option(1);
    flow->add_option("--time,-t", t, "time")->required();
    flow->add_option("--du", du, "sampling step for --profile");
    flow->add_option("--umax", umax, "right end of the sampling grid for --profile");
    flow->add_option("--out,-o", output, "output file (default: stdout)");
    flow->add_option("--format", format, "output format");

    auto* speeds = app.add_subcommand("speeds", "effective speeds for constant densities");
    speeds->add_option("--rho", rho, "comma-separated densities rho_1,...,rho_I")->required()->delimiter(',');
    speeds->add_option("--out,-o", output, "output file (default: stdout)");
    speeds->add_option("--format", format, "output format");

    auto* pde = app.add_subcommand("pde-check", "finite-difference residuals of the flow against the PDEs");
    pde->set_help_flag("--help", "Print this help message and exit");
    pde->add_option("--profile", profile_path, "density profile JSON with bump components")->required()->check(CLI::ExistingFile);
    pde->add_option("--time,-t", t, "time")->required();
    pde->add_option("--h", h, "spatial step")->default_val(0.01);
    pde->add_option("--delta", delta, "time step")->default_val(0.01);
    pde->add_option("--out,-o", output, "output file (default: stdout)");
    pde->add_option("--format", format, "output format");

    auto* experiment = app.add_subcommand("experiment", "Monte Carlo experiments");
    experiment->require_subcommand(1);
    auto* conv = experiment->add_subcommand("convergence", "hydrodynamic convergence sweep");
    conv->add_option("--rates", input, "slot rate JSON")->required()->check(CLI::ExistingFile);
    conv->add_option("--N", Ns, "comma-separated scales")->required()->delimiter(',');
    conv->add_option("--time,-t", times, "comma-separated times")->required()->delimiter(',');
    conv->add_option("--u0", u0, "right end of the error window")->default_val(1.0);
    conv->add_option("--trials", trials, "trials per scale")->default_val(1);
    conv->add_option("--seed", seed, "random seed")->default_val(0);
    conv->add_option("--dual-check-steps", dual_steps, "compare carrier and slot evolution up to this many steps")->default_val(1000);
    conv->add_option("--out,-o", output, "output file (default: stdout)");
    conv->add_option("--format", format, "output format");

    if (argc > 1 && argv[1][0] != '-') {
        bool known = false;
        for (const auto* s : app.get_subcommands({})) known = known || s->check_name(argv[1]);
        if (!known) {
            fail(bbs::ErrorKind::schema, "UnknownCommand", std::string("unknown command '") + argv[1] + "'");
            return 2;
        }
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
        fail(bbs::ErrorKind::schema, dynamic_cast<const CLI::ExtrasError*>(&e) ? "UnknownCommand" : "SchemaViolation", e.what());
        return 2;
    }

    try {
        m.output = output;
        m.format = format;
        if (*evolve) {
            m.command = "evolve";
            m.inputs = {input};
            run_evolve(m, steps);
        } else if (*decompose) {
            m.command = "decompose";
            m.inputs = {input};
            run_decompose(m);
        } else if (*reconstruct) {
            m.command = "reconstruct";
            m.inputs = {input};
            run_reconstruct(m);
        } else if (*shift) {
            m.command = "slots-shift";
            m.inputs = {input};
            run_slots_shift(m, steps);
        } else if (*flow) {
            m.command = "flow";
            const bool dens = !density_path.empty();
            m.inputs = {dens ? density_path : profile_path};
            m.params["input_kind"] = dens ? "density" : "profile";
            run_flow(m, t, du, umax);
        } else if (*speeds) {
            m.command = "speeds";
            run_speeds(m, rho);
        } else if (*pde) {
            m.command = "pde-check";
            m.inputs = {profile_path};
            run_pde_check(m, t, h, delta);
        } else if (*conv) {
            m.command = "experiment convergence";
            m.inputs = {input};
            run_convergence(m, Ns, times, u0, trials, seed, dual_steps);
        }
    } catch (const bbs::Error& e) {
        fail(e.kind(), e.code(), e.what());
        return static_cast<int>(e.kind());
    } catch (const std::bad_alloc&) {
        fail(bbs::ErrorKind::internal, "OutOfMemory", "allocation failed");
        return 4;
    } catch (const std::exception& e) {
        fail(bbs::ErrorKind::internal, "InternalInvariant", e.what());
        return 4;
    }
    return 0;
}
