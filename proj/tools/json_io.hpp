#pragma once

#include "dsk/dsk.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace dsk::io {

using json = nlohmann::json;

[[noreturn]] inline void malformed(const std::string& what) { throw error(errc::malformed_input, what); }

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) malformed("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        malformed("malformed JSON in '" + path + "': " + e.what());
    }
}

inline double as_number(const json& j, const std::string& what) {
    if (!j.is_number()) malformed(what + " must be a number");
    return j.get<double>();
}

/// A number, [re, im] or {"re": .., "im": ..}.
inline complex parse_complex(const json& j, const std::string& what = "value") {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2) return {as_number(j[0], what), as_number(j[1], what)};
    if (j.is_object() && j.contains("re")) return {as_number(j["re"], what), j.contains("im") ? as_number(j["im"], what) : 0.0};
    malformed(what + " must be a number, [re, im] or {re, im}");
}

inline json to_json(complex z) { return json::array({z.real(), z.imag()}); }

inline std::vector<complex> parse_complex_list(const json& j, const std::string& what) {
    if (!j.is_array()) malformed(what + " must be an array");
    std::vector<complex> out;
    for (const auto& x : j) out.push_back(parse_complex(x, what));
    return out;
}

inline long as_long(const json& j, const std::string& what) {
    if (!j.is_number_integer()) malformed(what + " must be an integer");
    return j.get<long>();
}

/// {"kind": "constant"|"geometric"|"power"|"list", ...}.
inline SequenceRule parse_rule(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) malformed("sequence rule needs a string 'kind'");
    const std::string kind = j["kind"];
    auto field = [&](const char* name) -> const json& {
        if (!j.contains(name)) malformed("rule '" + kind + "' needs field '" + name + "'");
        return j[name];
    };
    if (kind == "constant") return SequenceRule::constant(parse_complex(field("value"), "constant value"));
    if (kind == "geometric") {
        return SequenceRule::geometric(parse_complex(field("scale"), "scale"), as_number(field("ratio"), "ratio"));
    }
    if (kind == "power") {
        return SequenceRule::power(parse_complex(field("scale"), "scale"), as_number(field("exponent"), "exponent"));
    }
    if (kind == "list") return SequenceRule::list(parse_complex_list(field("values"), "list values"));
    malformed("unknown rule kind '" + kind + "'");
}

/// An array (finite head), a rule, or {"head": [...], "rule": {...}, "shift": n}.
inline Sequence parse_sequence(const json& j) {
    if (j.is_array()) return Sequence{parse_complex_list(j, "sequence")};
    if (!j.is_object()) malformed("sequence must be an array or an object");
    if (j.contains("kind")) return Sequence{parse_rule(j)};
    Sequence s;
    if (j.contains("head")) s.head = parse_complex_list(j["head"], "sequence head");
    if (j.contains("rule")) {
        s.tail = parse_rule(j["rule"]);
        s.shift = j.contains("shift") ? as_long(j["shift"], "shift") : s.head_size();
    }
    return s;
}

inline Eigen::MatrixXcd parse_dense(const json& j, const std::string& what) {
    if (!j.is_array()) malformed(what + " must be an array of rows");
    const long n = static_cast<long>(j.size());
    Eigen::MatrixXcd a(n, n);
    for (long r = 0; r < n; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<long>(row.size()) != n) malformed(what + " must be square");
        for (long c = 0; c < n; ++c) a(r, c) = parse_complex(row[static_cast<std::size_t>(c)], what + " entry");
    }
    return a;
}

inline std::optional<GrowthEnvelope> parse_envelope(const json& j) {
    if (!j.contains("envelope")) return std::nullopt;
    const json& e = j["envelope"];
    if (!e.is_object()) malformed("envelope must be an object");
    GrowthEnvelope g;
    g.C = as_number(e.value("C", json(0.0)), "envelope C");
    g.alpha = as_number(e.value("alpha", json(0.0)), "envelope alpha");
    g.q = as_number(e.value("q", json(1.0)), "envelope q");
    if (g.C < 0.0 || g.q < 0.0) malformed("envelope C and q must be nonnegative");
    return g;
}

inline SkMatrix parse_sk(const json& j) {
    SkMatrix m;
    if (!j.contains("k") || !j.contains("b") || !j.contains("d_rule")) {
        malformed("arrowhead needs 'k', 'b' and 'd_rule'");
    }
    m.k = as_long(j["k"], "k");
    m.b = parse_dense(j["b"], "b");
    m.c_rule = j.contains("c_rule") ? parse_rule(j["c_rule"]) : SequenceRule::constant(0.0);
    m.d_rule = parse_rule(j["d_rule"]);
    if (j.contains("d_adjust")) {
        if (!j["d_adjust"].is_object()) malformed("d_adjust must map tail indices to increments");
        for (const auto& [key, v] : j["d_adjust"].items()) {
            long l = 0;
            try {
                l = std::stol(key);
            } catch (...) {
                malformed("d_adjust key '" + key + "' is not an integer");
            }
            m.d_adjust[l] = as_number(v, "d_adjust value");
        }
    }
    m.validate();
    return m;
}

struct MatrixSpec {
    CoefficientMatrix matrix;
    std::optional<double> rho;
    std::optional<SkMatrix> sk;
    json echo;

    DirichletKernel kernel() const {
        if (!rho) malformed("this command needs 'rho' (the kernel's half-plane) in the matrix file");
        return {matrix, HalfPlane{*rho}};
    }
};

/// {"variant": "dense"|"diagonal"|"banded"|"arrowhead"|"rank_one", ..., "rho": r, "envelope": {...}, "open_tail": b}.
inline MatrixSpec parse_matrix(const json& j) {
    if (!j.is_object() || !j.contains("variant") || !j["variant"].is_string()) {
        malformed("matrix spec needs a string 'variant'");
    }
    MatrixSpec spec;
    spec.echo = j;
    const std::string type = j["variant"];
    if (type == "dense") {
        if (!j.contains("entries")) malformed("dense matrix needs 'entries'");
        spec.matrix = CoefficientMatrix::dense(parse_dense(j["entries"], "entries"));
    } else if (type == "diagonal") {
        if (!j.contains("diagonal")) malformed("diagonal matrix needs 'diagonal'");
        spec.matrix = CoefficientMatrix::diagonal(parse_sequence(j["diagonal"]));
    } else if (type == "banded") {
        if (!j.contains("k") || !j.contains("bands") || !j["bands"].is_array()) malformed("banded matrix needs 'k' and 'bands'");
        std::vector<Sequence> bands;
        for (const auto& b : j["bands"]) bands.push_back(parse_sequence(b));
        spec.matrix = CoefficientMatrix::banded(as_long(j["k"], "k"), std::move(bands));
    } else if (type == "arrowhead") {
        spec.sk = parse_sk(j);
        spec.matrix = CoefficientMatrix::arrowhead(*spec.sk);
    } else if (type == "rank_one") {
        if (!j.contains("factor")) malformed("rank_one matrix needs 'factor'");
        spec.matrix = CoefficientMatrix::rank_one(parse_sequence(j["factor"]));
    } else {
        malformed("unknown matrix variant '" + type + "'");
    }
    if (j.contains("rho")) spec.rho = as_number(j["rho"], "rho");
    spec.matrix.envelope = parse_envelope(j);
    if (j.contains("open_tail")) {
        if (!j["open_tail"].is_boolean()) malformed("open_tail must be a boolean");
        spec.matrix.open_tail = j["open_tail"];
        if (spec.matrix.open_tail && !spec.matrix.envelope) malformed("an open tail needs an envelope");
    }
    return spec;
}

/// {"kind": "ordinary"|"general", "coefficients": seq, "generator": rule, "exponents": [...],
///  "exponent_rule": {"kind": "log", "omega": w} | {"kind": "linear", "slope": c}, "envelope": {...}}.
///
/// Explicit coefficients come first; a generator continues them.
inline GeneralDirichletSeries parse_series(const json& j) {
    if (!j.is_object()) malformed("series spec must be an object");
    const std::string kind = j.value("kind", "ordinary");
    if (kind != "ordinary" && kind != "general") malformed("series kind must be 'ordinary' or 'general'");
    if (!j.contains("coefficients") && !j.contains("generator")) malformed("series spec needs 'coefficients' or 'generator'");
    GeneralDirichletSeries f;
    if (j.contains("coefficients")) f.coefficients = parse_sequence(j["coefficients"]);
    if (j.contains("generator")) {
        if (f.coefficients.tail) malformed("coefficients already carry a rule; drop 'generator'");
        f.coefficients.tail = parse_rule(j["generator"]);
        f.coefficients.shift = 0;
    }
    if (kind == "ordinary") {
        if (j.contains("exponents") || j.contains("exponent_rule")) malformed("ordinary series take no exponents");
        f.exponent_rule = ExponentRule::log_scaled(1.0);
    } else {
        if (j.contains("exponents")) {
            if (!j["exponents"].is_array()) malformed("exponents must be an array");
            for (const auto& x : j["exponents"]) f.exponents.push_back(as_number(x, "exponent"));
        }
        if (j.contains("exponent_rule")) {
            const json& r = j["exponent_rule"];
            const std::string rk = r.value("kind", "");
            if (rk == "log") {
                f.exponent_rule = ExponentRule::log_scaled(as_number(r.value("omega", json(1.0)), "omega"));
            } else if (rk == "linear") {
                f.exponent_rule = ExponentRule::linear(as_number(r.value("slope", json(1.0)), "slope"));
            } else {
                malformed("exponent_rule kind must be 'log' or 'linear'");
            }
        }
    }
    f.envelope = parse_envelope(j);
    if (j.contains("open_tail")) {
        if (!j["open_tail"].is_boolean()) malformed("open_tail must be a boolean");
        f.open_tail = j["open_tail"];
    }
    if (j.contains("abscissa")) f.abscissa = as_number(j["abscissa"], "abscissa");
    f.validate();
    return f;
}

inline Rational parse_rational(const json& j) {
    if (j.is_string()) return Rational::parse(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    malformed("offsets must be integers or strings like \"p/q\"");
}

inline SupportRule parse_support(const json& j) {
    if (!j.is_object() || !j.contains("kind")) malformed("support needs 'kind'");
    const std::string kind = j["kind"];
    if (kind == "all") return SupportRule::all();
    if (kind == "powers_of") return SupportRule::powers_of(as_long(j.value("base", json(2)), "base"));
    if (kind == "generated_by") {
        std::vector<long> g;
        for (const auto& x : j.value("generators", json::array())) g.push_back(as_long(x, "generator"));
        return SupportRule::generated_by(std::move(g));
    }
    if (kind == "explicit") {
        std::set<long> m;
        for (const auto& x : j.value("members", json::array())) m.insert(as_long(x, "member"));
        return SupportRule::explicit_set(std::move(m));
    }
    malformed("unknown support kind '" + kind + "'");
}

/// {"a": .., "offsets": ["p/q", ...], "diagonal": seq, "support": {...}, "order": M, "rho": r}.
inline TranslateSpan parse_span(const json& j) {
    if (!j.is_object()) malformed("span spec must be an object");
    TranslateSpan s;
    s.a = as_number(j.value("a", json(1.0)), "a");
    if (j.contains("offsets")) {
        if (!j["offsets"].is_array()) malformed("offsets must be an array");
        for (const auto& b : j["offsets"]) s.offsets.push_back(parse_rational(b));
    }
    if (j.contains("diagonal")) s.diagonal = parse_sequence(j["diagonal"]);
    if (j.contains("support")) s.support = parse_support(j["support"]);
    s.order = as_long(j.value("order", json(1000)), "order");
    s.rho = as_number(j.value("rho", json(0.5)), "rho");
    s.validate();
    return s;
}

/// "re" or "re,im".
inline complex parse_point(const std::string& text) {
    std::stringstream ss(text);
    double re = 0.0, im = 0.0;
    char comma = 0;
    if (!(ss >> re)) malformed("point '" + text + "' must be 're' or 're,im'");
    if (ss >> comma) {
        if (comma != ',' || !(ss >> im)) malformed("point '" + text + "' must be 're' or 're,im'");
    }
    std::string rest;
    if (ss >> rest) malformed("point '" + text + "' has trailing characters");
    return {re, im};
}

inline json matrix_to_json(const Eigen::MatrixXcd& a) {
    json rows = json::array();
    for (long r = 0; r < a.rows(); ++r) {
        json row = json::array();
        for (long c = 0; c < a.cols(); ++c) row.push_back(to_json(a(r, c)));
        rows.push_back(row);
    }
    return rows;
}

inline json vector_to_json(const Eigen::VectorXcd& v) {
    json out = json::array();
    for (long i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
    return out;
}

inline json value_to_json(const ValueWithBound& v) {
    return {{"value", to_json(v.value)},
            {"error_radius", v.error_radius},
            {"rounding", v.rounding},
            {"total_radius", v.total_radius()},
            {"certified", v.certified()}};
}

inline json certificate_to_json(const PsdCertificate& c) {
    json j;
    j["verdict"] = c.psd() ? "psd_up_to_order" : "not_psd";
    j["max_order"] = c.max_order;
    j["tolerance"] = c.tolerance;
    j["orders"] = c.orders;
    j["min_eigenvalues"] = c.min_eigenvalues;
    j["norms"] = c.norms;
    if (!c.psd()) {
        j["witness_order"] = c.witness_order;
        j["witness"] = vector_to_json(c.witness);
        j["witness_value"] = c.witness_value;
    }
    return j;
}

inline json witness_to_json(const InvarianceWitness& w) {
    return {{"automorphism", {{"a", w.phi.a}, {"b", w.phi.b}, {"c", w.phi.c}, {"d", w.phi.d}, {"rho", w.phi.rho}}},
            {"s", to_json(w.s)},
            {"u", to_json(w.u)},
            {"violation", w.violation},
            {"error_radius", w.radius}};
}

inline json span_vector_to_json(const SpanVector& v) {
    json out = json::array();
    for (const auto& [b, c] : v.terms()) {
        out.push_back({{"label", b.str()}, {"re", c.re.str()}, {"im", c.im.str()}});
    }
    return out;
}

} // namespace dsk::io
