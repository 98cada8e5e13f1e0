#pragma once

#include "json_io.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dsk::cli {

using io::json;

inline constexpr const char* kSchema = "dsk-report/1";

/// Exit codes: completed analyses (including negative findings) return 0.
enum exit_code : int { ok = 0, bad_input = 2, internal_fault = 3 };

struct Options {
    std::string matrix, series, span, out, format = "json";
    long order = 64;
    long max_order = 16;
    double tol = 1e-9;
    std::uint64_t seed = 7;
    std::string s = "2", u = "2";
    // command-specific
    long symbol = 1;
    long recover = 0;
    bool infinity = false;
    std::vector<std::string> fhat;
    long perturb = 0;
    std::optional<double> growth_rho;
    bool verify = false;
    long pairs = 1000;
    std::optional<double> delta;
    bool probe = false;
    double omega = std::sqrt(2.0);
    long m_max = 50, n_max = 50;
    long steps = 20;
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;

    json to_json() const {
        json out = {{"columns", columns}, {"rows", json::array()}};
        for (const auto& r : rows) out["rows"].push_back(r);
        return out;
    }
};

struct Report {
    json body;
    std::optional<Table> trace;
};

/// JSON has no infinities; non-finite numbers are written as strings.
inline void sanitize(json& j) {
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (std::isnan(v)) j = "nan";
        else if (std::isinf(v)) j = v > 0 ? "inf" : "-inf";
    } else if (j.is_structured()) {
        for (auto& x : j) sanitize(x);
    }
}

inline std::string csv_field(const json& v) {
    json x = v;
    sanitize(x);
    if (x.is_string()) return x.get<std::string>();
    return x.dump();
}

inline std::string render(const std::string& command, const Options& o, const json& inputs, const Report& r) {
    if (o.format == "csv") {
        if (!r.trace) throw error(errc::malformed_input, "command '" + command + "' has no trace table for csv output");
        std::string out;
        for (std::size_t i = 0; i < r.trace->columns.size(); ++i) out += (i ? "," : "") + r.trace->columns[i];
        out += "\n";
        for (const auto& row : r.trace->rows) {
            for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(row[i]);
            out += "\n";
        }
        return out;
    }
    json j;
    j["schema"] = kSchema;
    j["command"] = command;
    j["inputs"] = inputs;
    j["result"] = r.body;
    if (r.trace) j["trace"] = r.trace->to_json();
    sanitize(j);
    return j.dump(2) + "\n";
}

inline io::MatrixSpec load_matrix(const Options& o) {
    if (o.matrix.empty()) throw error(errc::malformed_input, "--matrix FILE is required");
    return io::parse_matrix(io::read_json_file(o.matrix));
}

// ---------------------------------------------------------------- eval

inline Report cmd_eval(const Options& o, json& inputs) {
    const complex s = io::parse_point(o.s), u = io::parse_point(o.u);
    inputs["s"] = io::to_json(s);
    inputs["order"] = o.order;
    Report r;
    Table t{{"order", "re", "im", "error_radius", "rounding"}, {}};
    auto ladder = [&](auto&& eval) {
        for (long n = 1; n < o.order; n *= 4) {
            const ValueWithBound v = eval(n);
            t.rows.push_back({n, v.value.real(), v.value.imag(), v.error_radius, v.rounding});
        }
        const ValueWithBound v = eval(o.order);
        t.rows.push_back({o.order, v.value.real(), v.value.imag(), v.error_radius, v.rounding});
        return v;
    };
    if (!o.series.empty()) {
        const json spec = io::read_json_file(o.series);
        inputs["series"] = spec;
        const GeneralDirichletSeries f = io::parse_series(spec);
        r.body["kind"] = "series";
        r.body["certified_abscissa"] = certified_abscissa(f);
        r.body["evaluation"] = io::value_to_json(ladder([&](long n) { return evaluate(f, s, n); }));
        r.trace = t;
        return r;
    }
    const io::MatrixSpec spec = load_matrix(o);
    inputs["matrix"] = spec.echo;
    inputs["u"] = io::to_json(u);
    const DirichletKernel k = spec.kernel();
    r.body["kind"] = "kernel";
    r.body["evaluation"] = io::value_to_json(ladder([&](long n) { return kernel_eval(k, s, u, n); }));
    if (o.recover > 0) {
        inputs["recover"] = o.recover;
        CoefficientRecoverer rec = kernel_recoverer(k, o.recover);
        json rows = json::array();
        for (long m = 1; m <= o.recover; ++m) {
            for (long n = 1; n <= o.recover; ++n) {
                const complex x = rec.recover(m, n);
                rows.push_back({{"m", m}, {"n", n}, {"recovered", io::to_json(x)}, {"entry", io::to_json(k.matrix.entry(m, n))},
                                {"error", std::abs(x - k.matrix.entry(m, n))}});
            }
        }
        r.body["recovery"] = {{"tolerance", RecoveryOptions{}.tol}, {"entries", rows}};
    }
    r.trace = t;
    return r;
}

// ---------------------------------------------------------------- psd

inline Report cmd_psd(const Options& o, json& inputs) {
    const io::MatrixSpec spec = load_matrix(o);
    inputs["matrix"] = spec.echo;
    inputs["max_order"] = o.max_order;
    inputs["tol"] = o.tol;
    Report r;
    PsdCertificate cert;
    if (spec.sk) {
        const SkPsdReport sk = certify_psd_sk(*spec.sk, o.max_order, o.tol);
        cert = sk.ladder;
        r.body["sk"] = {{"s_value", sk.sk.s_value},
                        {"s_lower", sk.sk.s_lower},
                        {"lambda_min_b", sk.sk.lambda_min_b},
                        {"eigenvalues_b", sk.sk.eigenvalues_b},
                        {"c2d_sum", sk.sk.c2d_sum},
                        {"c2d_remainder", sk.sk.c2d.remainder},
                        {"closed_form", sk.sk.c2d.closed_form},
                        {"schur_certified", sk.schur_certified},
                        {"note", sk.note}};
    } else {
        cert = psd_check(spec.matrix, o.max_order, o.tol);
    }
    r.body["certificate"] = io::certificate_to_json(cert);
    Table t{{"order", "min_eigenvalue", "norm"}, {}};
    for (std::size_t i = 0; i < cert.orders.size(); ++i) t.rows.push_back({cert.orders[i], cert.min_eigenvalues[i], cert.norms[i]});
    r.trace = t;
    return r;
}

// ---------------------------------------------------------------- symbols

inline Report cmd_symbols(const Options& o, json& inputs) {
    const io::MatrixSpec spec = load_matrix(o);
    inputs["matrix"] = spec.echo;
    inputs["symbol"] = o.symbol;
    inputs["order"] = o.order;
    Report r;
    const long shown = std::min(o.order, 64L);
    const AnalyticSymbol A = analytic_symbol(spec.matrix, o.symbol);
    json coeffs = json::array();
    Table t{{"m", "re", "im"}, {}};
    for (long m = 1; m <= shown; ++m) {
        const complex c = A.series.coefficient(m);
        coeffs.push_back(io::to_json(c));
        t.rows.push_back({m, c.real(), c.imag()});
    }
    r.body["symbol"] = {{"n", o.symbol}, {"coefficients", coeffs}, {"shown", shown}};
    if (spec.rho) {
        const DirichletKernel k = spec.kernel();
        const complex s = io::parse_point(o.s), u = io::parse_point(o.u);
        inputs["s"] = io::to_json(s);
        inputs["u"] = io::to_json(u);
        const ResidualReport e = expansion_check(k, s, u, o.order);
        r.body["expansion_check"] = {{"residual", e.residual}, {"bound", e.bound}, {"within_bound", e.within_bound()}};
    }
    if (o.infinity) {
        const CoefficientMatrix inf = infinity_kernel(spec.matrix);
        r.body["infinity_kernel"] = {{"variant", inf.variant_name()}, {"section", io::matrix_to_json(inf.truncation(std::min(o.order, 8L)))}};
    }
    r.trace = t;
    return r;
}

// ---------------------------------------------------------------- membership

/// --matrix takes a plain matrix spec or a query {"matrix": spec, "fhat": [...], "order": N, "c_max": c}.
inline Report cmd_membership(const Options& o, json& inputs) {
    if (o.matrix.empty()) throw error(errc::malformed_input, "--matrix FILE is required");
    const json doc = io::read_json_file(o.matrix);
    const bool query = doc.is_object() && doc.contains("matrix");
    const io::MatrixSpec spec = io::parse_matrix(query ? doc["matrix"] : doc);
    const long order = query && doc.contains("order") ? io::as_long(doc["order"], "order") : o.order;
    const double c_max = query && doc.contains("c_max") ? io::as_number(doc["c_max"], "c_max") : 1e6;
    inputs["matrix"] = spec.echo;
    inputs["order"] = order;
    inputs["tol"] = o.tol;
    inputs["c_max"] = c_max;
    std::vector<complex> f;
    if (query && doc.contains("fhat")) {
        f = io::parse_complex_list(doc["fhat"], "fhat");
        inputs["fhat"] = doc["fhat"];
    } else if (!o.series.empty()) {
        const json sj = io::read_json_file(o.series);
        inputs["series"] = sj;
        const Sequence c = io::parse_sequence(sj.contains("coefficients") ? sj["coefficients"] : sj);
        for (long n = 1; n <= order; ++n) f.push_back(c(n));
    } else {
        for (const auto& x : o.fhat) f.push_back(io::parse_point(x));
        inputs["fhat"] = o.fhat;
    }
    if (f.empty()) throw error(errc::malformed_input, "membership needs --series FILE or --fhat values");
    const MembershipReport m = membership_test(spec.matrix, f, order, o.tol, c_max);
    Report r;
    r.body = {{"member", m.member}, {"c_max", m.c_max}, {"resolution", m.resolution}, {"order", m.order}, {"note", m.note}};
    r.body["c_star"] = m.c_star ? json(*m.c_star) : json(nullptr);
    Table t{{"c", "min_eigenvalue"}, {}};
    for (std::size_t i = 0; i < m.c_trace.size(); ++i) t.rows.push_back({m.c_trace[i], m.eigen_trace[i]});
    r.trace = t;
    return r;
}

// ---------------------------------------------------------------- sk

inline Report cmd_sk(const Options& o, json& inputs) {
    Report r;
    SkMatrix m;
    if (o.matrix.empty()) {
        const WorkedExampleReport ex = paper_example(o.steps, o.max_order);
        inputs["example"] = true;
        m = ex.matrix;
        json steps = json::array();
        for (const auto& st : ex.steps) {
            steps.push_back({{"j", st.j}, {"S_j", st.S_j}, {"S_closed", st.S_closed}, {"trace", st.trace}, {"det", st.det}});
        }
        r.body["example"] = {{"eigenvalues_b", ex.eigenvalues_b}, {"c2d_sum", ex.c2d_sum}, {"s_value", ex.s_value},
                             {"steps", steps}, {"all_positive", ex.all_positive}};
    } else {
        const io::MatrixSpec spec = load_matrix(o);
        inputs["matrix"] = spec.echo;
        if (!spec.sk) throw error(errc::malformed_input, "sk needs an arrowhead matrix");
        m = *spec.sk;
    }
    inputs["max_order"] = o.max_order;
    inputs["tol"] = o.tol;
    const SkPsdReport rep = certify_psd_sk(m, o.max_order, o.tol);
    r.body["s_value"] = rep.sk.s_value;
    r.body["s_lower"] = rep.sk.s_lower;
    r.body["c2d_sum"] = rep.sk.c2d_sum;
    r.body["c2d_remainder"] = rep.sk.c2d.remainder;
    r.body["schur_certified"] = rep.schur_certified;
    r.body["note"] = rep.note;
    r.body["ladder"] = io::certificate_to_json(rep.ladder);
    if (o.perturb > 0) {
        inputs["perturb"] = o.perturb;
        if (sk_margin(rep.sk) > 0.0) {
            const EpsilonSearch e = epsilon_m_search(m, o.perturb, o.max_order);
            r.body["epsilon"] = {{"index", o.perturb}, {"eps", e.eps}, {"s_after", e.s_after}};
            if (e.eps_max) r.body["epsilon"]["eps_max"] = *e.eps_max;
        } else {
            r.body["epsilon"] = {{"index", o.perturb}, {"note", "no perturbation search: s(a) <= 0"}};
        }
    }
    if (o.growth_rho) {
        inputs["growth_rho"] = *o.growth_rho;
        const GrowthReport g = growth_check(m, *o.growth_rho, 10'000);
        r.body["growth"] = {{"ok", g.ok}, {"C", g.C}, {"asymptotic_ok", g.asymptotic_ok}, {"checked_up_to", 10'000}};
    }
    Table t{{"j", "S_j", "lambda_min", "weyl_lower"}, {}};
    for (const auto& st : rep.schur) t.rows.push_back({st.j, st.S_j, st.lambda_min, st.weyl_lower});
    r.trace = t;
    return r;
}

// ---------------------------------------------------------------- invariance

inline Report cmd_invariance(const Options& o, json& inputs) {
    const io::MatrixSpec spec = load_matrix(o);
    inputs["matrix"] = spec.echo;
    inputs["order"] = o.order;
    inputs["tol"] = o.tol;
    inputs["seed"] = o.seed;
    const DirichletKernel k = spec.kernel();
    const TranslationReport t = translation_invariance_test(k, o.order, o.tol, o.seed);
    Report r;
    r.body["translation"] = {{"invariant", t.invariant}, {"numeric_agrees", t.numeric_agrees}, {"samples", t.samples},
                             {"max_sampled_excess", t.max_sampled_excess}};
    r.body["translation"]["bandwidth"] = t.bandwidth ? json(*t.bandwidth) : json("none");
    if (t.witness) r.body["translation"]["witness"] = io::witness_to_json(*t.witness);
    const AutLReport a = autL_invariance_test(k, o.order, o.tol);
    r.body["linear_automorphisms"] = {{"constant", a.constant}, {"invariant", a.invariant}};
    if (a.witness) r.body["linear_automorphisms"]["witness"] = io::witness_to_json(*a.witness);
    return r;
}

// ---------------------------------------------------------------- classify

inline Report cmd_classify(const Options& o, json& inputs) {
    const io::MatrixSpec spec = load_matrix(o);
    inputs["matrix"] = spec.echo;
    inputs["order"] = o.order;
    inputs["tol"] = o.tol;
    const DirichletKernel k = spec.kernel();
    const double rank_tol = 1e-8;
    const QuasiInvarianceReport q = quasi_invariance_classify(k, o.order, rank_tol, default_classification_grid(k.domain.rho));
    Report r;
    r.body["verdict"] = q.quasi_invariant() ? "QuasiInvariant" : "NotQuasiInvariant";
    r.body["reason"] = q.reason;
    r.body["caveat"] = q.caveat;
    r.body["rank_tolerance"] = rank_tol;
    r.body["singular_values"] = q.singular_values;
    if (q.factor) {
        r.body["factor"] = io::vector_to_json(*q.factor);
        r.body["factor_residual"] = q.factor_residual;
    }
    if (q.zero_free_abscissa) r.body["zero_free_abscissa"] = *q.zero_free_abscissa;
    json grid = json::array();
    Table t{{"re", "im", "modulus", "radius", "nonvanishing"}, {}};
    for (const auto& g : q.grid) {
        grid.push_back({{"z", io::to_json(g.z)}, {"modulus", g.modulus}, {"radius", g.radius}, {"nonvanishing", g.nonvanishing}});
        t.rows.push_back({g.z.real(), g.z.imag(), g.modulus, g.radius, g.nonvanishing});
    }
    r.body["grid"] = grid;
    if (q.quasi_invariant() && !q.factor_zero) {
        std::vector<complex> f(q.factor->data(), q.factor->data() + q.factor->size());
        const double rho = k.domain.rho;
        const std::vector<complex> pts = {{rho + 1.0, 0.0}, {rho + 1.5, 2.0}, {rho + 2.5, -1.0}};
        json checks = json::array();
        for (const Automorphism& phi : {Automorphism::translation(1.0, rho), Automorphism::scaling(std::sqrt(2.0), rho)}) {
            const CocycleReport c = cocycle_unitarity_check(Sequence{f}, phi, pts, o.order);
            checks.push_back({{"automorphism", {{"a", phi.a}, {"b", phi.b}, {"c", phi.c}, {"d", phi.d}}},
                              {"residual", c.residual}, {"error_radius", c.radius}, {"consistency", c.consistency}});
        }
        r.body["cocycle_checks"] = checks;
    }
    r.trace = t;
    return r;
}

// ---------------------------------------------------------------- homog

inline Rational random_rational(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::int64_t> num(-10'000, 10'000), den(1, 997);
    return Rational(num(rng), den(rng));
}

inline Report cmd_homog(const Options& o, json& inputs) {
    Report r;
    if (o.verify) {
        inputs["verify"] = true;
        inputs["pairs"] = o.pairs;
        inputs["seed"] = o.seed;
        std::mt19937_64 rng(o.seed);
        long nonzero = 0;
        json first_failure = nullptr;
        for (long i = 0; i < o.pairs; ++i) {
            const Rational c = random_rational(rng), b = random_rational(rng);
            const SpanVector res = homogeneity_verify(c, b);
            if (!res.is_zero()) {
                if (nonzero == 0) first_failure = {{"c", c.str()}, {"b", b.str()}, {"residual", io::span_vector_to_json(res)}};
                ++nonzero;
            }
        }
        r.body["homogeneity"] = {{"pairs", o.pairs}, {"nonzero_residuals", nonzero}, {"tolerance", 0},
                                 {"residual", nonzero == 0 ? "0" : "nonzero"}, {"first_failure", first_failure}};
        if (nonzero != 0) throw error(errc::internal_check, "homogeneity relation failed in exact arithmetic");
    }
    if (!o.span.empty()) {
        const json sj = io::read_json_file(o.span);
        inputs["span"] = sj;
        const TranslateSpan span = io::parse_span(sj);
        const AdmissibilityReport adm = admissibility_check(span.support, std::max(4L, std::min(span.order, 10'000L)));
        r.body["admissibility"] = {{"multiplicative", adm.multiplicative}, {"admissible_up_to_M", adm.admissible_up_to_M},
                                   {"support_size", adm.support_size}};
        r.body["admissibility"]["coprime_pair"] =
            adm.coprime_pair ? json::array({adm.coprime_pair->first, adm.coprime_pair->second}) : json(nullptr);
        if (!span.offsets.empty()) {
            const GramReport g = translate_gram(span);
            r.body["gram"] = {{"matrix", io::matrix_to_json(g.G)}, {"tail_bound", g.tail_bound},
                              {"min_eigenvalue", g.min_eigenvalue}, {"max_eigenvalue", g.max_eigenvalue},
                              {"tolerance", g.tolerance}, {"independent", g.independent},
                              {"independence_certified", g.independence_certified}};
        }
        if (o.delta) {
            inputs["delta"] = *o.delta;
            Table t{{"M", "partial_sum", "remainder_bound", "identity_residual", "identity_bound"}, {}};
            json rows = json::array();
            for (long M = 10; M <= span.order; M *= 10) {
                const MdeltaReport m = mdelta_check(span, std::nullopt, *o.delta, M);
                t.rows.push_back({M, m.partial_sum, m.remainder_bound, m.identity_residual, m.identity_bound});
                rows.push_back({{"M", M}, {"finite", m.finite}, {"partial_sum", m.partial_sum},
                                {"remainder_bound", m.finite ? json(m.remainder_bound) : json("inf")},
                                {"kernel_value", m.kernel_value ? json(*m.kernel_value) : json(nullptr)},
                                {"identity_residual", m.identity_residual}, {"identity_bound", m.identity_bound},
                                {"identity_ok", m.identity_ok}, {"note", m.note}});
            }
            r.body["mdelta"] = rows;
            r.trace = t;
        }
        if (o.probe) {
            std::vector<complex> h = sj.contains("h") ? io::parse_complex_list(sj["h"], "h") : std::vector<complex>{1.0};
            std::vector<double> grid;
            for (int b = -5; b <= 5; ++b) grid.push_back(b);
            const AdjointProbe p = adjoint_domain_probe(h, grid, span);
            json fn = json::array();
            for (const complex& v : p.functional) fn.push_back(io::to_json(v));
            r.body["adjoint_probe"] = {{"diagnostic", true}, {"b_grid", p.b_grid}, {"functional", fn},
                                       {"fit_order", p.fit_order}, {"fit_residual", p.fit_residual},
                                       {"functional_max", p.functional_max}, {"growth", p.growth}};
        }
    }
    if (!o.verify && o.span.empty()) throw error(errc::malformed_input, "homog needs --verify and/or --span FILE");
    return r;
}

// ---------------------------------------------------------------- merge

inline Report cmd_merge(const Options& o, json& inputs) {
    inputs["omega"] = o.omega;
    inputs["m_max"] = o.m_max;
    inputs["n_max"] = o.n_max;
    const std::vector<MergedTerm> terms = merge_log_exponents(o.omega, o.m_max, o.n_max);
    double min_gap = kInf;
    bool increasing = true;
    for (std::size_t i = 1; i < terms.size(); ++i) {
        const double g = terms[i].nu - terms[i - 1].nu;
        increasing = increasing && g > 0.0;
        min_gap = std::min(min_gap, g);
    }
    Report r;
    r.body = {{"count", terms.size()}, {"strictly_increasing", increasing}, {"collision_tolerance", kCollisionTolerance}};
    r.body["min_gap"] = terms.size() > 1 ? json(min_gap) : json(nullptr);
    Table t{{"index", "nu", "m", "n"}, {}};
    for (std::size_t i = 0; i < terms.size(); ++i) t.rows.push_back({i + 1, terms[i].nu, terms[i].m, terms[i].n});
    r.trace = t;
    return r;
}

// ---------------------------------------------------------------- dispatch

inline int exit_for(errc code) { return code == errc::internal_check ? internal_fault : bad_input; }

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dirichlet series kernel toolkit"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* c) {
        c->add_option("--out", o.out, "Write the report to FILE instead of standard output");
        c->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
        c->add_option("--tol", o.tol, "Tolerance");
        c->add_option("--seed", o.seed, "Random seed");
    };
    auto matrix_opts = [&](CLI::App* c) { c->add_option("--matrix", o.matrix, "Coefficient matrix JSON file"); };

    CLI::App* eval = app.add_subcommand("eval", "Evaluate a kernel or a Dirichlet series with certified error");
    matrix_opts(eval);
    eval->add_option("--series", o.series, "Dirichlet series JSON file");
    eval->add_option("--order", o.order, "Truncation order");
    eval->add_option("--s", o.s, "First argument, 're' or 're,im'");
    eval->add_option("--u", o.u, "Second argument, 're' or 're,im'");
    eval->add_option("--recover", o.recover, "Recover a_{m,n} for m, n up to this index from kernel samples");

    CLI::App* psd = app.add_subcommand("psd", "Certify positive semi-definiteness on a truncation ladder");
    matrix_opts(psd);
    psd->add_option("--max-order", o.max_order, "Largest section order");

    CLI::App* symbols = app.add_subcommand("symbols", "Analytic symbols and expansion identities");
    matrix_opts(symbols);
    symbols->add_option("--n", o.symbol, "Symbol index");
    symbols->add_option("--order", o.order, "Truncation order");
    symbols->add_option("--s", o.s, "First argument");
    symbols->add_option("--u", o.u, "Second argument");
    symbols->add_flag("--infinity", o.infinity, "Also build the kernel at infinity");

    CLI::App* member = app.add_subcommand("membership", "Test membership of a Dirichlet series in the RKHS");
    matrix_opts(member);
    member->add_option("--series", o.series, "Coefficients of f as JSON");
    member->add_option("--fhat", o.fhat, "Coefficients of f, each 're' or 're,im'");
    member->add_option("--order", o.order, "Section order");

    CLI::App* sk = app.add_subcommand("sk", "Structured S_k certificates (built-in example without --matrix)");
    matrix_opts(sk);
    sk->add_option("--max-order", o.max_order, "Largest ladder order");
    sk->add_option("--perturb", o.perturb, "Search a positive perturbation at this index");
    sk->add_option("--growth-rho", o.growth_rho, "Check d_l = O(l^{rho-1}) for this rho");
    sk->add_option("--steps", o.steps, "Schur steps for the built-in example");

    CLI::App* inv = app.add_subcommand("invariance", "Translation and linear-automorphism invariance");
    matrix_opts(inv);
    inv->add_option("--order", o.order, "Truncation order");

    CLI::App* cls = app.add_subcommand("classify", "Quasi-invariance classification");
    matrix_opts(cls);
    cls->add_option("--order", o.order, "Section order");

    CLI::App* homog = app.add_subcommand("homog", "Homogeneous operator on spans of kernel translates");
    homog->add_flag("--verify", o.verify, "Check the homogeneity relation on random rational pairs");
    homog->add_option("--pairs", o.pairs, "Number of random pairs");
    homog->add_option("--span", o.span, "Span JSON file");
    homog->add_option("--delta", o.delta, "Check the weighted summability condition for this delta");
    homog->add_flag("--probe", o.probe, "Run the adjoint-domain diagnostic");

    CLI::App* merge = app.add_subcommand("merge", "Merged exponents log m + omega log n");
    merge->add_option("--omega", o.omega, "Exponent scale");
    merge->add_option("--m-max", o.m_max, "Largest m");
    merge->add_option("--n-max", o.n_max, "Largest n");

    for (CLI::App* c : {eval, psd, symbols, member, sk, inv, cls, homog, merge}) common(c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        json j = {{"schema", kSchema}, {"error", {{"code", "malformed_input"}, {"message", e.what()}}}};
        out << j.dump(2) << "\n";
        return bad_input;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    json inputs = json::object();
    auto emit_error = [&](const std::string& code, const std::string& message) {
        json j = {{"schema", kSchema}, {"command", command}, {"error", {{"code", code}, {"message", message}}}};
        out << j.dump(2) << "\n";
        err << "dsk " << command << ": " << message << "\n";
    };
    try {
        Report r;
        if (chosen == eval) r = cmd_eval(o, inputs);
        else if (chosen == psd) r = cmd_psd(o, inputs);
        else if (chosen == symbols) r = cmd_symbols(o, inputs);
        else if (chosen == member) r = cmd_membership(o, inputs);
        else if (chosen == sk) r = cmd_sk(o, inputs);
        else if (chosen == inv) r = cmd_invariance(o, inputs);
        else if (chosen == cls) r = cmd_classify(o, inputs);
        else if (chosen == homog) r = cmd_homog(o, inputs);
        else r = cmd_merge(o, inputs);
        const std::string text = render(command, o, inputs, r);
        if (o.out.empty()) {
            out << text;
        } else {
            std::ofstream f(o.out);
            if (!f) throw error(errc::malformed_input, "cannot write '" + o.out + "'");
            f << text;
        }
        return ok;
    } catch (const error& e) {
        emit_error(std::string(to_string(e.code())), e.what());
        return exit_for(e.code());
    } catch (const std::exception& e) {
        emit_error("internal_check", e.what());
        return internal_fault;
    }
}

} // namespace dsk::cli
