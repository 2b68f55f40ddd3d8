#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ddirac/counterexample.hpp"
#include "ddirac/inverse.hpp"

using namespace ddirac;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRegion = 3;
constexpr int kExitConvergence = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config_path;
    double a1_pi = -1.0, a2_pi = -1.0;
    int n_max = 20;
    int n_hadamard = 200;
    int n_fourier = 64;
    std::size_t n_cells = 2048;
    bool n_cells_set = false;
    std::string betas = "0,1,i,2";
    std::string theta_sampling = "auto";
    std::string out = ".";
    std::string spectra_path;

    json config;  // parsed problem config, may be null
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed config JSON: " + std::string(e.what()));
    }
    return j;
}

DelayPair resolve_delays(const Options& opt) {
    double a1 = opt.a1_pi, a2 = opt.a2_pi;
    if (!opt.config.is_null()) {
        if (a1 < 0 && opt.config.contains("a1_pi"))
            a1 = opt.config["a1_pi"].get<double>();
        if (a2 < 0 && opt.config.contains("a2_pi"))
            a2 = opt.config["a2_pi"].get<double>();
    }
    if (a1 < 0 || a2 < 0)
        throw ConfigError("delays missing: give --a1-pi/--a2-pi or a config");
    if (!(a1 >= 1.0 / 3.0 && a1 < 1.0) || !(a2 >= 1.0 / 3.0 && a2 < 1.0))
        throw ConfigError("delay out of range: a1_pi and a2_pi must lie in "
                          "[1/3, 1)");
    return DelayPair{a1 * kPi, a2 * kPi};
}

std::size_t resolve_n_cells(const Options& opt, std::size_t fallback) {
    if (opt.n_cells_set) return opt.n_cells;
    if (!opt.config.is_null() && opt.config.contains("n_cells"))
        return opt.config["n_cells"].get<std::size_t>();
    return fallback;
}

GridFn grid_from_array(const json& arr, std::size_t n_cells) {
    if (!arr.is_array() || arr.size() != n_cells + 1)
        throw ConfigError("potential sample arrays must have length n_cells+1");
    std::vector<cplx> v(n_cells + 1);
    for (std::size_t i = 0; i <= n_cells; ++i) {
        const json& e = arr[i];
        if (e.is_number())
            v[i] = cplx{e.get<double>(), 0.0};
        else if (e.is_array() && e.size() == 2)
            v[i] = cplx{e[0].get<double>(), e[1].get<double>()};
        else
            throw ConfigError("potential samples must be numbers or [re, im]");
    }
    return GridFn(std::move(v), 0.0, kPi);
}

PotentialSet resolve_potentials(const Options& opt, const DelayPair& d,
                                std::size_t n_cells) {
    json p = opt.config.is_null() ? json() : opt.config.value("potentials", json());
    if (p.is_null() || p.is_string()) {
        std::string name = p.is_null() ? "zero" : p.get<std::string>();
        try {
            return preset(name, d, n_cells);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (p.is_object()) {
        for (const char* k : {"p1", "p2", "q1", "q2"})
            if (!p.contains(k))
                throw ConfigError(std::string("potentials object missing ") + k);
        return PotentialSet(
            d, grid_from_array(p["p1"], n_cells).remasked(d.a1, kPi),
            grid_from_array(p["p2"], n_cells).remasked(d.a1, kPi),
            grid_from_array(p["q1"], n_cells).remasked(d.a2, kPi),
            grid_from_array(p["q2"], n_cells).remasked(d.a2, kPi));
    }
    throw ConfigError("potentials must be a preset name or a sample object");
}

cplx parse_complex(std::string s) {
    std::string t;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t.empty()) throw ConfigError("empty complex literal");
    if (t.back() != 'i' && t.back() != 'I') {
        std::size_t pos = 0;
        double re = std::stod(t, &pos);
        if (pos != t.size()) throw ConfigError("bad complex literal: " + s);
        return cplx{re, 0.0};
    }
    t.pop_back();
    // find the sign separating real and imaginary parts, if any
    std::size_t split = std::string::npos;
    for (std::size_t i = 1; i < t.size(); ++i)
        if ((t[i] == '+' || t[i] == '-') &&
            t[i - 1] != 'e' && t[i - 1] != 'E')
            split = i;
    auto imag_of = [&](std::string u) {
        if (u.empty() || u == "+") return 1.0;
        if (u == "-") return -1.0;
        std::size_t pos = 0;
        double v = std::stod(u, &pos);
        if (pos != u.size()) throw ConfigError("bad complex literal: " + s);
        return v;
    };
    if (split == std::string::npos) return cplx{0.0, imag_of(t)};
    std::size_t pos = 0;
    double re = std::stod(t.substr(0, split), &pos);
    if (pos != split) throw ConfigError("bad complex literal: " + s);
    return cplx{re, imag_of(t.substr(split))};
}

std::vector<cplx> parse_betas(const std::string& s) {
    std::vector<cplx> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_complex(item));
    if (out.empty()) throw ConfigError("empty beta list");
    return out;
}

void write_atomic(const fs::path& path,
                  const std::function<void(std::ostream&)>& fn) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        fn(os);
    }
    fs::rename(tmp, path);
}

fs::path out_dir(const Options& opt) {
    fs::path dir(opt.out);
    fs::create_directories(dir);
    return dir;
}

std::vector<cplx> lambda_grid_from_config(const Options& opt) {
    double lo = -10.0, hi = 10.0;
    int count = 81;
    if (!opt.config.is_null()) {
        lo = opt.config.value("lambda_min", lo);
        hi = opt.config.value("lambda_max", hi);
        count = opt.config.value("lambda_count", count);
    }
    if (count < 2 || hi <= lo) throw ConfigError("bad lambda grid");
    std::vector<cplx> grid(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
        grid[static_cast<std::size_t>(k)] =
            cplx{lo + (hi - lo) * double(k) / double(count - 1), 0.0};
    return grid;
}

void write_potentials_csv(std::ostream& os, const PotentialSet& pot) {
    os << std::setprecision(15);
    std::size_t n = pot.n_cells();
    for (std::size_t i = 0; i <= n; ++i) {
        double x = kPi * double(i) / double(n);
        os << x;
        for (const GridFn* g : {&pot.p1, &pot.p2, &pot.q1, &pot.q2})
            os << ',' << g->value_at_node(i).real() << ','
               << g->value_at_node(i).imag();
        os << '\n';
    }
}

json report_to_json(const RecoveryReport& rep) {
    json stages = json::array();
    for (const auto& st : rep.stages)
        stages.push_back({{"target", std::string(1, st.target)},
                          {"interval", {st.lo, st.hi}},
                          {"corrections", st.corrections},
                          {"max_correction", st.max_correction}});
    return json{{"region", region_name(rep.region)},
                {"case", rep.case_label},
                {"stages", stages},
                {"theta_sampling", rep.theta_sampling}};
}

int cmd_forward(const Options& opt) {
    DelayPair d = resolve_delays(opt);
    std::size_t n_cells = resolve_n_cells(opt, 2048);
    PotentialSet pot = resolve_potentials(opt, d, n_cells);
    KernelSet ks = assemble_kernels(pot);
    fs::path dir = out_dir(opt);
    write_atomic(dir / "kernels.csv", [&](std::ostream& os) { ks.write_csv(os); });
    auto grid = lambda_grid_from_config(opt);
    write_atomic(dir / "delta.csv", [&](std::ostream& os) {
        os << "lambda,j,m,re,im\n" << std::setprecision(15);
        for (cplx lam : grid)
            for (int j : {1, 2})
                for (int m : {0, 1}) {
                    CharFnEvaluator ev{&ks, j, m};
                    cplx v = eval_delta(ev, lam);
                    os << lam.real() << ',' << j << ',' << m << ',' << v.real()
                       << ',' << v.imag() << '\n';
                }
    });
    return 0;
}

int cmd_eigs(const Options& opt) {
    DelayPair d = resolve_delays(opt);
    std::size_t n_cells = resolve_n_cells(opt, 2048);
    PotentialSet pot = resolve_potentials(opt, d, n_cells);
    KernelSet ks = assemble_kernels(pot);
    Spectrum spec = find_all_eigenvalues(ks, opt.n_max);
    fs::path dir = out_dir(opt);
    write_atomic(dir / "spectrum.csv",
                 [&](std::ostream& os) { spec.write_csv(os); });
    if (!spec.missing.empty()) {
        for (auto& [m, j, n] : spec.missing)
            std::cerr << "no converged root for (m=" << m << ", j=" << j
                      << ", n=" << n << ")\n";
        return kExitConvergence;
    }
    return 0;
}

Spectrum read_spectrum_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open spectra file: " + path);
    Spectrum spec;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f;
        std::vector<std::string> fields;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() != 5)
            throw ConfigError("bad spectrum row: " + line);
        int m = std::stoi(fields[0]), j = std::stoi(fields[1]),
            n = std::stoi(fields[2]);
        spec.set(m, j, n, cplx{std::stod(fields[3]), std::stod(fields[4])});
        spec.n_max = std::max(spec.n_max, std::abs(n));
    }
    return spec;
}

struct InversionResult {
    RecoveryReport report;
    GridFn K0, K1, G0, G1;
};

InversionResult invert_from_spectrum(const Spectrum& spec, const DelayPair& d,
                                     int n_hadamard, int n_fourier,
                                     std::size_t n_cells,
                                     const std::string& sampling) {
    RecoverKernelOptions kopt;
    kopt.sampling = (sampling == "half-integer") ? ThetaSampling::half_integer
                                                 : ThetaSampling::integer;
    std::array<std::pair<GridFn, GridFn>, 2> kg{
        std::pair{GridFn::zero(n_cells), GridFn::zero(n_cells)},
        std::pair{GridFn::zero(n_cells), GridFn::zero(n_cells)}};
    for (int m : {0, 1}) {
        HadamardDelta h1(spec, m, 1, n_hadamard);
        HadamardDelta h2(spec, m, 2, n_hadamard);
        DeltaEvaluator d1 = [&h1](cplx l) { return h1(l); };
        DeltaEvaluator d2 = [&h2](cplx l) { return h2(l); };
        kg[static_cast<std::size_t>(m)] =
            recover_kernels(d1, d2, d, n_fourier, n_cells, kopt);
    }
    auto rep = recover_potentials(kg[0].first, kg[1].first, kg[0].second,
                                  kg[1].second, d);
    rep.theta_sampling =
        (kopt.sampling == ThetaSampling::half_integer) ? "half-integer"
                                                       : "integer";
    return {std::move(rep), std::move(kg[0].first), std::move(kg[1].first),
            std::move(kg[0].second), std::move(kg[1].second)};
}

int cmd_invert(const Options& opt) {
    DelayPair d = resolve_delays(opt);
    if (Region r = classify(d); r != Region::R1)
        throw RegionError(r, "inversion requires region R1 (got " +
                                 region_name(r) +
                                 "): the inverse problem is not uniquely "
                                 "solvable outside it");
    if (opt.spectra_path.empty())
        throw ConfigError("invert needs a spectra CSV argument");
    Spectrum spec = read_spectrum_csv(opt.spectra_path);
    std::size_t n_cells = resolve_n_cells(opt, 2048);
    std::optional<InversionResult> res;
    try {
        res = invert_from_spectrum(spec, d, opt.n_hadamard, opt.n_fourier,
                                   n_cells, opt.theta_sampling);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());  // incomplete spectra
    }
    fs::path dir = out_dir(opt);
    write_atomic(dir / "potentials.csv", [&](std::ostream& os) {
        write_potentials_csv(os, res->report.recovered);
    });
    write_atomic(dir / "recovery_report.json", [&](std::ostream& os) {
        os << report_to_json(res->report).dump(2) << '\n';
    });
    return 0;
}

double trimmed_rel_l2(const GridFn& got, const GridFn& want, double lo,
                      double hi) {
    double num = 0.0, den = 0.0;
    std::size_t n = got.n_cells();
    for (std::size_t i = 0; i <= n; ++i) {
        double x = kPi * double(i) / double(n);
        if (x < lo || x > hi) continue;
        num += std::norm(got.value_at_node(i) - want.value_at_node(i));
        den += std::norm(want.value_at_node(i));
    }
    return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

int cmd_roundtrip(const Options& opt) {
    DelayPair d = resolve_delays(opt);
    if (Region r = classify(d); r != Region::R1)
        throw RegionError(r, "round trip requires region R1 (got " +
                                 region_name(r) + ")");
    std::size_t n_cells = resolve_n_cells(opt, 2048);
    PotentialSet pot = resolve_potentials(opt, d, n_cells);
    KernelSet ks = assemble_kernels(pot);
    Spectrum spec = find_all_eigenvalues(ks, opt.n_hadamard);
    if (!spec.missing.empty()) {
        for (auto& [m, j, n] : spec.missing)
            std::cerr << "no converged root for (m=" << m << ", j=" << j
                      << ", n=" << n << ")\n";
        return kExitConvergence;
    }
    InversionResult res =
        invert_from_spectrum(spec, d, opt.n_hadamard, opt.n_fourier, n_cells,
                             opt.theta_sampling);
    double tol = opt.config.is_null() ? 5e-2 : opt.config.value("tolerance", 5e-2);
    double band = 0.02 * kPi;
    json errors;
    bool pass = true;
    const PotentialSet& rec = res.report.recovered;
    for (auto [name, got, want, lo] :
         {std::tuple{"p1", &rec.p1, &pot.p1, d.a1},
          std::tuple{"p2", &rec.p2, &pot.p2, d.a1},
          std::tuple{"q1", &rec.q1, &pot.q1, d.a2},
          std::tuple{"q2", &rec.q2, &pot.q2, d.a2}}) {
        double e = trimmed_rel_l2(*got, *want, lo + band, kPi - band);
        errors[name] = e;
        if (!(e <= tol)) pass = false;
    }
    json rep = report_to_json(res.report);
    rep["errors"] = errors;
    rep["tolerance"] = tol;
    rep["pass"] = pass;
    fs::path dir = out_dir(opt);
    write_atomic(dir / "roundtrip_report.json",
                 [&](std::ostream& os) { os << rep.dump(2) << '\n'; });
    return 0;
}

int cmd_counterexample(const Options& opt) {
    DelayPair d = resolve_delays(opt);
    // grid-aligned default: the discrete cancellation identities are exact
    // when the half-delays fall on grid nodes
    std::size_t n_cells = resolve_n_cells(opt, 5000);
    double hs_lo = 2.0 * d.a1 + 0.5 * d.a2;
    auto h0 = GridFn::sample(n_cells, std::min(hs_lo, kPi), kPi,
                             [](double) { return cplx{1.0}; });
    auto op = unit_eigenpair(h0, d, n_cells);
    auto betas = parse_betas(opt.betas);
    auto fam = build_beta_family(op, betas);
    std::vector<cplx> grid;
    for (int k = 0; k <= 40; ++k) grid.push_back(cplx{-5.0 + 0.25 * k, 0.0});
    auto rep = verify_independence(op, fam, betas, grid, opt.n_max);
    json jb = json::array();
    for (cplx b : betas) jb.push_back({b.real(), b.imag()});
    json out{{"a1_pi", d.a1 / kPi},
             {"a2_pi", d.a2 / kPi},
             {"n_cells", n_cells},
             {"betas", jb},
             {"mu", op.mu},
             {"max_delta_deviation", rep.max_delta_deviation},
             {"max_eigenvalue_displacement", rep.max_eig_displacement},
             {"u_residual", rep.u_residual},
             {"v_residual", rep.v_residual},
             {"k_residual", rep.k_residual},
             {"closed_form_residual", rep.closed_form_residual},
             {"missing_eigenvalues", rep.missing_eigenvalues.size()}};
    fs::path dir = out_dir(opt);
    write_atomic(dir / "counterexample_report.json",
                 [&](std::ostream& os) { os << out.dump(2) << '\n'; });
    if (!rep.missing_eigenvalues.empty()) return kExitConvergence;
    return 0;
}

int cmd_region(const Options& opt, bool write_sweep) {
    DelayPair d = resolve_delays(opt);
    Region r = classify(d);
    double s = 2.0 * d.a1 + 0.5 * d.a2;
    std::cout << region_name(r) << '\n'
              << std::setprecision(15)
              << "distance to 2a1+a2/2=pi boundary: " << std::abs(s - kPi)
              << '\n'
              << "distance to a1=a2 diagonal: " << std::abs(d.a1 - d.a2)
              << '\n';
    if (write_sweep) {
        fs::path dir = out_dir(opt);
        write_atomic(dir / "region_grid.csv", [&](std::ostream& os) {
            os << "a1_pi,a2_pi,region\n" << std::setprecision(15);
            for (int i = 0; i < 200; ++i)
                for (int k = 0; k < 200; ++k) {
                    double a1 = 1.0 / 3.0 + (i + 0.5) * (1.0 - 1.0 / 3.0) / 200.0;
                    double a2 = 1.0 / 3.0 + (k + 0.5) * (1.0 - 1.0 / 3.0) / 200.0;
                    os << a1 << ',' << a2 << ','
                       << region_name(classify(DelayPair{a1 * kPi, a2 * kPi}))
                       << '\n';
                }
        });
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral problems for Dirac-type systems with two delays"};
    app.require_subcommand(1);

    Options opt;
    if (const char* th = std::getenv("DDIRAC_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(th, &end, 10);
        if (!end || *end != '\0' || v < 1) {
            std::cerr << "config error: DDIRAC_THREADS must be a positive "
                         "integer\n";
            return kExitConfig;
        }
    }

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "problem config JSON");
        sub->add_option("--a1-pi", opt.a1_pi, "first delay as a fraction of pi");
        sub->add_option("--a2-pi", opt.a2_pi, "second delay as a fraction of pi");
        sub->add_option("--n-max", opt.n_max, "eigenvalue index bound");
        sub->add_option("--n-hadamard", opt.n_hadamard,
                        "Hadamard product truncation");
        sub->add_option("--n-fourier", opt.n_fourier, "Fourier truncation");
        sub->add_option("--n-cells", opt.n_cells, "grid cells on [0, pi]")
            ->each([&](const std::string&) { opt.n_cells_set = true; });
        sub->add_option("--betas", opt.betas,
                        "comma list of complex literals like 1+2i");
        sub->add_option("--theta-sampling", opt.theta_sampling,
                        "integer|half-integer|auto")
            ->check(CLI::IsMember({"integer", "half-integer", "auto"}));
        sub->add_option("--out", opt.out, "output directory");
    };

    auto* forward = app.add_subcommand("forward",
                                       "kernels and characteristic functions");
    auto* eigs = app.add_subcommand("eigs", "eigenvalue families");
    auto* invert = app.add_subcommand("invert",
                                      "potentials from four spectra (R1 only)");
    invert->add_option("spectra", opt.spectra_path, "spectrum CSV path");
    auto* roundtrip = app.add_subcommand("roundtrip",
                                         "forward + invert + compare");
    auto* counterex = app.add_subcommand(
        "counterexample", "isospectral family verification (R2 only)");
    auto* region = app.add_subcommand("region", "delay-pair classification");
    bool sweep = false;
    region->add_flag("--sweep", sweep, "also write the 200x200 region grid");
    for (CLI::App* sub :
         {forward, eigs, invert, roundtrip, counterex, region})
        add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!opt.config_path.empty()) opt.config = load_config(opt.config_path);
        if (app.got_subcommand(forward)) return cmd_forward(opt);
        if (app.got_subcommand(eigs)) return cmd_eigs(opt);
        if (app.got_subcommand(invert)) return cmd_invert(opt);
        if (app.got_subcommand(roundtrip)) return cmd_roundtrip(opt);
        if (app.got_subcommand(counterex)) return cmd_counterexample(opt);
        if (app.got_subcommand(region)) return cmd_region(opt, sweep);
    } catch (const RegionError& e) {
        std::cerr << "region refusal: " << e.what() << '\n';
        return kExitRegion;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
