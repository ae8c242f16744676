#pragma once
// JSON structure files and CSV reports.
//
// Structure schema:
//   {"signature": {"relations": [{"name": "E", "arity": 2, "layer": 0}], "layers": 1},
//    "elements": ["a", "b"],
//    "relations": {"E": [["a", "b"], ["b", "a"]]}}
// A metric file may give "thresholds": ["0", "1/2", "1"] instead of a signature;
// the relations are then d_0, d_1/2, d_1 on layer 0.

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "invforge/limit.hpp"
#include "invforge/metric.hpp"

namespace invforge {

using Json = nlohmann::ordered_json;

// ---- structures -----------------------------------------------------------

inline Json structure_to_json(const FinStructure& s) {
    s.normalize();
    Json sig = Json::object();
    sig["relations"] = Json::array();
    for (const auto& r : s.signature().relations())
        sig["relations"].push_back({{"name", r.name}, {"arity", r.arity}, {"layer", r.layer}});
    sig["layers"] = s.signature().layers();
    Json out = Json::object();
    out["signature"] = sig;
    out["elements"] = s.labels();
    Json rels = Json::object();
    for (std::size_t r = 0; r < s.signature().size(); ++r) {
        Json ts = Json::array();
        for (const auto& t : s.relation(static_cast<int>(r)).tuples()) {
            Json tj = Json::array();
            for (auto e : t) tj.push_back(s.label(static_cast<int>(e)));
            ts.push_back(tj);
        }
        rels[s.signature()[r].name] = ts;
    }
    out["relations"] = rels;
    return out;
}

inline std::string write_structure_string(const FinStructure& s) { return structure_to_json(s).dump(1) + "\n"; }

namespace detail {

[[noreturn]] inline void field_error(const std::string& field, const std::string& what) {
    throw Error(ErrorKind::ParseError, "field " + field + ": " + what);
}

// Message without the "Kind: " prefix, for re-wrapping.
inline std::string bare(const Error& e) {
    std::string w = e.what();
    std::string pre = std::string(kind_name(e.kind())) + ": ";
    return w.rfind(pre, 0) == 0 ? w.substr(pre.size()) : w;
}

inline int line_of(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

inline const Json& need(const Json& j, const std::string& key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) field_error(where + key, "missing");
    return j.at(key);
}

inline int need_int(const Json& j, const std::string& field) {
    if (!j.is_number_integer()) field_error(field, "expected an integer");
    return j.get<int>();
}

inline Signature signature_from_json(const Json& root) {
    if (root.contains("signature")) {
        const Json& sj = root.at("signature");
        const Json& rj = need(sj, "relations", "signature.");
        if (!rj.is_array()) field_error("signature.relations", "expected an array");
        std::vector<RelationSymbol> rels;
        for (std::size_t i = 0; i < rj.size(); ++i) {
            std::string f = "signature.relations[" + std::to_string(i) + "].";
            const Json& name = need(rj[i], "name", f);
            if (!name.is_string()) field_error(f + "name", "expected a string");
            RelationSymbol r;
            r.name = name.get<std::string>();
            r.arity = need_int(need(rj[i], "arity", f), f + "arity");
            r.layer = rj[i].contains("layer") ? need_int(rj[i].at("layer"), f + "layer") : 0;
            if (r.arity < 1) field_error(f + "arity", "must be positive");
            rels.push_back(r);
        }
        int layers = need_int(need(sj, "layers", "signature."), "signature.layers");
        try {
            return Signature(rels, layers);
        } catch (const Error& e) {
            field_error("signature", bare(e));
        }
    }
    if (root.contains("thresholds")) {
        const Json& tj = root.at("thresholds");
        if (!tj.is_array()) field_error("thresholds", "expected an array");
        MetricThresholds t;
        for (std::size_t i = 0; i < tj.size(); ++i) {
            std::string f = "thresholds[" + std::to_string(i) + "]";
            if (!tj[i].is_string() && !tj[i].is_number_integer()) field_error(f, "expected a rational string");
            try {
                t.values.push_back(parse_rational(tj[i].is_string() ? tj[i].get<std::string>() : tj[i].dump()));
            } catch (const Error& e) {
                field_error(f, bare(e));
            }
        }
        try {
            t.validate();
        } catch (const Error& e) {
            field_error("thresholds", bare(e));
        }
        std::vector<RelationSymbol> rels;
        for (const auto& q : t.values) rels.push_back({threshold_name(q), 2, 0});
        return Signature(rels, 1);
    }
    field_error("signature", "missing (and no thresholds given)");
}

}  // namespace detail

inline FinStructure structure_from_json(const Json& root) {
    if (!root.is_object()) detail::field_error("(root)", "expected an object");
    Signature sig = detail::signature_from_json(root);
    // d_q names must carry exact rationals whenever thresholds were given
    if (root.contains("thresholds")) thresholds_of(sig);
    FinStructure s(sig);
    const Json& ej = detail::need(root, "elements", "");
    if (!ej.is_array()) detail::field_error("elements", "expected an array");
    for (std::size_t i = 0; i < ej.size(); ++i) {
        std::string f = "elements[" + std::to_string(i) + "]";
        if (!ej[i].is_string()) detail::field_error(f, "expected a string label");
        auto l = ej[i].get<std::string>();
        if (s.has_element(l)) detail::field_error(f, "duplicate label " + l);
        s.add_element(l);
    }
    const Json& rj = root.contains("relations") ? root.at("relations") : Json::object();
    if (!rj.is_object()) detail::field_error("relations", "expected an object");
    for (auto it = rj.begin(); it != rj.end(); ++it) {
        std::string f = "relations." + it.key();
        int r = sig.index_of(it.key());
        if (r < 0) detail::field_error(f, "relation not in signature");
        if (!it.value().is_array()) detail::field_error(f, "expected an array of tuples");
        int arity = sig[r].arity;
        for (std::size_t i = 0; i < it.value().size(); ++i) {
            const Json& tj = it.value()[i];
            std::string ft = f + "[" + std::to_string(i) + "]";
            if (!tj.is_array()) detail::field_error(ft, "expected a tuple");
            if (static_cast<int>(tj.size()) != arity)
                detail::field_error(ft, "arity " + std::to_string(tj.size()) + ", expected " + std::to_string(arity));
            std::vector<int> t;
            for (const auto& e : tj) {
                if (!e.is_string() || !s.has_element(e.get<std::string>()))
                    detail::field_error(ft, "unknown element " + e.dump());
                t.push_back(s.index_of(e.get<std::string>()));
            }
            s.add_tuple(r, t);
        }
    }
    s.normalize();
    return s;
}

inline FinStructure read_structure_string(const std::string& text) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::ParseError,
                    "line " + std::to_string(detail::line_of(text, e.byte == 0 ? 0 : e.byte - 1)) + ": " + e.what());
    }
    return structure_from_json(root);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline FinStructure read_structure(const std::string& path) {
    try {
        return read_structure_string(read_file(path));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::ParseError) throw;
        throw Error(ErrorKind::ParseError, path + ": " + detail::bare(e));
    }
}

inline void write_structure(const FinStructure& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + path);
    out << write_structure_string(s);
}

// Sample dump: the structure plus the address behind each element.
inline Json sample_to_json(const SampledStructure& s) {
    Json out = structure_to_json(s.structure);
    out["addresses"] = Json::array();
    for (const auto& a : s.addresses) out["addresses"].push_back(address_str(a));
    out["collision"] = s.collision_flag;
    return out;
}

// ---- reports --------------------------------------------------------------

// Shortest round-trip decimal, so equal doubles always print equally.
inline std::string format_double(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline const char* kCsvHeader = "run_id,n,quantity,type_id,estimate,sigma,bound,pass";

inline void write_csv(const std::vector<ReportRow>& rows, std::ostream& out) {
    out << kCsvHeader << "\n";
    for (const auto& r : rows)
        out << csv_field(r.run_id) << ',' << r.n << ',' << csv_field(r.quantity) << ',' << csv_field(r.type_id) << ','
            << format_double(r.estimate) << ',' << format_double(r.sigma) << ',' << format_double(r.bound) << ','
            << (r.pass ? "PASS" : "FAIL") << "\n";
}

inline Json rows_to_json(const std::vector<ReportRow>& rows) {
    Json out = Json::array();
    for (const auto& r : rows)
        out.push_back({{"run_id", r.run_id},
                       {"n", r.n},
                       {"quantity", r.quantity},
                       {"type_id", r.type_id},
                       {"estimate", r.estimate},
                       {"sigma", r.sigma},
                       {"bound", r.bound},
                       {"pass", r.pass}});
    return out;
}

}  // namespace invforge
