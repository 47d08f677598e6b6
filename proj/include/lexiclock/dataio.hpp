#pragma once

// File formats.
//
//   word lists   TSV, UTF-8, header `variety<TAB>concept<TAB>word`; an empty
//                word field is a missing datum.
//   single list  TSV, header `concept<TAB>word` (one variety).
//   metadata     CSV, header `variety,name,latitude,longitude,clade`.
//   config       JSON object with optional keys lambda, mu, n_eff, l_eff, m,
//                theta.
//   tables       CSV with `\n` endings and 17 significant digits, or JSON
//                (array of objects keyed by column name).
//
// Numbers are parsed and printed with <charconv>, never through the locale.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "analytics.hpp"
#include "errors.hpp"
#include "estimation.hpp"
#include "params.hpp"
#include "simulator.hpp"

namespace lexiclock {

// ---------------------------------------------------------------------------
// text helpers

inline std::u32string utf8_decode(std::string_view s, std::size_t line = 0) {
    std::u32string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t extra = 0;
        char32_t cp = 0;
        if (c < 0x80) {
            cp = c;
        } else if ((c & 0xE0) == 0xC0) {
            cp = c & 0x1F;
            extra = 1;
        } else if ((c & 0xF0) == 0xE0) {
            cp = c & 0x0F;
            extra = 2;
        } else if ((c & 0xF8) == 0xF0) {
            cp = c & 0x07;
            extra = 3;
        } else {
            throw parse_error("invalid UTF-8 lead byte", line);
        }
        for (std::size_t k = 1; k <= extra; ++k) {
            if (i + k >= s.size()) throw parse_error("truncated UTF-8 sequence", line);
            const auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) throw parse_error("invalid UTF-8 continuation byte", line);
            cp = (cp << 6) | (cc & 0x3F);
        }
        out.push_back(cp);
        i += extra + 1;
    }
    return out;
}

inline std::string utf8_encode(std::u32string_view s) {
    std::string out;
    for (char32_t cp : s) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

namespace detail {

inline void chomp(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

inline std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find('\t', start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

// RFC 4180 style: fields may be double-quoted, "" escapes a quote.
inline std::vector<std::string> split_csv(const std::string& line, std::size_t lineno) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty() && !was_quoted) {
            quoted = was_quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else {
            field.push_back(c);
        }
    }
    if (quoted) throw parse_error("unterminated quoted field", lineno);
    out.push_back(std::move(field));
    return out;
}

}  // namespace detail

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    if (!s.empty() && s.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || first == last) return std::nullopt;
    return v;
}

// Shortest text that reads back to the same double, at most 17 significant
// digits. Non-finite values print as inf / -inf / nan.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    if (ec != std::errc{}) throw error("format_double failed");
    std::string s(buf, ptr);
    // Prefer the shortest round-tripping form when it is shorter.
    auto [p2, ec2] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec2 == std::errc{} && static_cast<std::size_t>(p2 - buf) < s.size()) s.assign(buf, p2);
    return s;
}

// ---------------------------------------------------------------------------
// datasets

struct DatasetFiles {
    std::filesystem::path lists_path;
    std::filesystem::path meta_path;
    std::optional<std::filesystem::path> config_path;
};

inline std::vector<VarietyMeta> read_metadata(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw parse_error("metadata file is empty", 1);
    ++lineno;
    detail::chomp(line);
    if (line != "variety,name,latitude,longitude,clade")
        throw parse_error("metadata header must be 'variety,name,latitude,longitude,clade'", lineno);

    std::vector<VarietyMeta> out;
    std::map<std::string, std::size_t> seen;
    while (std::getline(in, line)) {
        ++lineno;
        detail::chomp(line);
        if (line.empty()) continue;
        const auto f = detail::split_csv(line, lineno);
        if (f.size() != 5) throw parse_error("expected 5 comma-separated fields", lineno);
        VarietyMeta v;
        v.id = f[0];
        v.name = f[1];
        if (v.id.empty()) throw parse_error("empty variety id", lineno);
        const auto lat = parse_double(f[2]);
        const auto lon = parse_double(f[3]);
        if (!lat || !lon) throw parse_error("invalid coordinate for variety " + v.id, lineno);
        v.latitude = *lat;
        v.longitude = *lon;
        if (!(std::abs(v.latitude) <= 90.0) || !(std::abs(v.longitude) <= 180.0))
            throw parse_error("invalid coordinate for variety " + v.id, lineno);
        v.clade = f[4];
        if (auto [it, fresh] = seen.emplace(v.id, lineno); !fresh)
            throw parse_error("duplicate variety " + v.id + " (first on line " + std::to_string(it->second) + ")",
                              lineno);
        out.push_back(std::move(v));
    }
    return out;
}

// Builds a dataset from the two tables. Varieties follow metadata order
// (restricted to those present in the lists); concepts follow first
// appearance in the lists.
inline SwadeshDataset read_dataset(std::istream& lists, std::istream& meta) {
    const auto metadata = read_metadata(meta);
    std::map<std::string, std::size_t> meta_index;
    for (std::size_t k = 0; k < metadata.size(); ++k) meta_index.emplace(metadata[k].id, k);

    struct Entry {
        std::size_t variety, concept_index;
        std::u32string word;
    };
    std::vector<Entry> entries;
    std::vector<std::string> concepts;
    std::map<std::string, std::size_t> concept_index;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> first_line;

    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(lists, line)) throw parse_error("word-list file is empty", 1);
    ++lineno;
    detail::chomp(line);
    if (line != "variety\tconcept\tword") throw parse_error("word-list header must be 'variety<TAB>concept<TAB>word'", lineno);

    while (std::getline(lists, line)) {
        ++lineno;
        detail::chomp(line);
        if (line.empty()) continue;
        const auto f = detail::split_tabs(line);
        if (f.size() != 3) throw parse_error("expected 3 tab-separated fields", lineno);
        const auto mi = meta_index.find(f[0]);
        if (mi == meta_index.end()) throw parse_error("variety '" + f[0] + "' has no metadata", lineno);
        if (f[1].empty()) throw parse_error("empty concept id", lineno);
        auto [ci, fresh] = concept_index.emplace(f[1], concepts.size());
        if (fresh) concepts.push_back(f[1]);
        const auto key = std::make_pair(mi->second, ci->second);
        if (auto [it, inserted] = first_line.emplace(key, lineno); !inserted)
            throw parse_error("duplicate entry for variety '" + f[0] + "', concept '" + f[1] + "' on lines " +
                                  std::to_string(it->second) + " and " + std::to_string(lineno),
                              lineno);
        entries.push_back({mi->second, ci->second, utf8_decode(f[2], lineno)});
    }

    std::vector<bool> present(metadata.size(), false);
    for (const auto& e : entries) present[e.variety] = true;
    std::vector<std::size_t> slot(metadata.size(), 0);
    SwadeshDataset ds;
    for (std::size_t k = 0; k < metadata.size(); ++k) {
        if (!present[k]) continue;
        slot[k] = ds.varieties.size();
        ds.varieties.push_back(metadata[k]);
    }
    ds.concepts = concepts;
    ds.words.assign(ds.varieties.size(), std::vector<std::u32string>(concepts.size()));
    for (auto& e : entries) ds.words[slot[e.variety]][e.concept_index] = std::move(e.word);
    ds.validate();
    return ds;
}

namespace detail {

inline std::ifstream open_in(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw error("cannot open " + p.string());
    return in;
}

}  // namespace detail

inline SwadeshDataset load_dataset(const DatasetFiles& files) {
    auto lists = detail::open_in(files.lists_path);
    auto meta = detail::open_in(files.meta_path);
    try {
        return read_dataset(lists, meta);
    } catch (const parse_error& e) {
        throw parse_error(e.what() + std::string(" in ") + files.lists_path.string() + " / " +
                              files.meta_path.string(),
                          0);
    }
}

// One variety's list: concept -> word, in file order.
struct WordList {
    std::vector<std::string> concepts;
    std::vector<std::u32string> words;
};

inline WordList read_word_list(std::istream& in) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw parse_error("word list is empty", 1);
    detail::chomp(line);
    if (line != "concept\tword") throw parse_error("word-list header must be 'concept<TAB>word'", 1);
    WordList out;
    std::map<std::string, std::size_t> seen;
    while (std::getline(in, line)) {
        ++lineno;
        detail::chomp(line);
        if (line.empty()) continue;
        const auto f = detail::split_tabs(line);
        if (f.size() != 2) throw parse_error("expected 2 tab-separated fields", lineno);
        if (auto [it, fresh] = seen.emplace(f[0], lineno); !fresh)
            throw parse_error("duplicate concept '" + f[0] + "' on lines " + std::to_string(it->second) + " and " +
                                  std::to_string(lineno),
                              lineno);
        out.concepts.push_back(f[0]);
        out.words.push_back(utf8_decode(f[1], lineno));
    }
    return out;
}

inline WordList load_word_list(const std::filesystem::path& p) {
    auto in = detail::open_in(p);
    return read_word_list(in);
}

// Aligns two single-variety lists on the union of their concepts (first list
// order, then concepts only in the second); absent entries become missing.
inline std::pair<std::vector<std::u32string>, std::vector<std::u32string>> align_lists(const WordList& a,
                                                                                     const WordList& b) {
    std::vector<std::string> order = a.concepts;
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < order.size(); ++i) idx.emplace(order[i], i);
    for (const auto& c : b.concepts)
        if (idx.emplace(c, order.size()).second) order.push_back(c);
    std::vector<std::u32string> wa(order.size()), wb(order.size());
    for (std::size_t i = 0; i < a.concepts.size(); ++i) wa[idx.at(a.concepts[i])] = a.words[i];
    for (std::size_t i = 0; i < b.concepts.size(); ++i) wb[idx.at(b.concepts[i])] = b.words[i];
    return {std::move(wa), std::move(wb)};
}

// ---------------------------------------------------------------------------
// configuration

struct RunConfig {
    EvolutionParams params;
    double theta = 0.5;
};

inline RunConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw parse_error("config must be a JSON object", 0);
    RunConfig c;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_number()) throw parse_error("config key '" + key + "' must be a number", 0);
        if (key == "lambda") c.params.lambda = value.get<double>();
        else if (key == "mu") c.params.mu = value.get<double>();
        else if (key == "n_eff") c.params.n_eff = value.get<double>();
        else if (key == "l_eff") c.params.l_eff = value.get<double>();
        else if (key == "m") {
            if (!value.is_number_integer()) throw parse_error("config key 'm' must be an integer", 0);
            c.params.m = value.get<int>();
        } else if (key == "theta") c.theta = value.get<double>();
        else throw parse_error("unknown config key '" + key + "'", 0);
    }
    c.params.validate();
    if (!(c.theta >= 0.0 && c.theta <= 1.0)) throw invalid_argument("theta must lie in [0, 1]");
    return c;
}

inline RunConfig load_config(const std::filesystem::path& p) {
    auto in = detail::open_in(p);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("config " + p.string() + ": " + e.what(), 0);
    }
    return config_from_json(j);
}

inline nlohmann::json to_json(const RunConfig& c) {
    return {{"lambda", c.params.lambda}, {"mu", c.params.mu},   {"n_eff", c.params.n_eff},
            {"l_eff", c.params.l_eff},   {"m", c.params.m},     {"theta", c.theta}};
}

// ---------------------------------------------------------------------------
// result tables

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

enum class TableFormat { csv, json };

inline std::string format_cell(const Cell& c) {
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    return std::get<std::string>(c);
}

inline void write_csv(const Table& t, std::ostream& out) {
    for (std::size_t k = 0; k < t.columns.size(); ++k) out << (k ? "," : "") << t.columns[k];
    out << '\n';
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size()) throw invalid_argument("table row width mismatch");
        for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_cell(row[k]);
        out << '\n';
    }
}

inline nlohmann::json table_json(const Table& t) {
    auto arr = nlohmann::json::array();
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size()) throw invalid_argument("table row width mismatch");
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t k = 0; k < row.size(); ++k) {
            std::visit(
                [&](const auto& v) {
                    using V = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<V, double>) {
                        // JSON has no infinities; keep the CSV sentinel text.
                        if (std::isfinite(v)) obj[t.columns[k]] = v;
                        else obj[t.columns[k]] = format_double(v);
                    } else {
                        obj[t.columns[k]] = v;
                    }
                },
                row[k]);
        }
        arr.push_back(std::move(obj));
    }
    return arr;
}

inline void write_json(const Table& t, std::ostream& out) { out << table_json(t).dump(2) << '\n'; }

inline void write_table(const Table& t, std::ostream& out, TableFormat f) {
    if (f == TableFormat::csv) write_csv(t, out);
    else write_json(t, out);
}

inline void write_text_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw error("cannot open " + p.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw error("write to " + p.string() + " failed");
}

inline void write_results(const Table& t, const std::filesystem::path& p, TableFormat f) {
    std::ostringstream os;
    write_table(t, os, f);
    write_text_file(p, os.str());
}

// Reads a CSV written by write_csv. Cells come back as int64 when the text is
// an integer literal, double when it parses as a number (inf/nan included),
// string otherwise.
inline Table read_csv(std::istream& in) {
    Table t;
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw parse_error("table is empty", 1);
    detail::chomp(line);
    t.columns = detail::split_csv(line, lineno);
    while (std::getline(in, line)) {
        ++lineno;
        detail::chomp(line);
        if (line.empty()) continue;
        auto fields = detail::split_csv(line, lineno);
        if (fields.size() != t.columns.size()) throw parse_error("row width differs from header", lineno);
        std::vector<Cell> row;
        for (auto& f : fields) {
            std::int64_t iv = 0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), iv);
            if (ec == std::errc{} && ptr == f.data() + f.size() && !f.empty()) {
                row.emplace_back(iv);
            } else if (auto d = parse_double(f)) {
                row.emplace_back(*d);
            } else {
                row.emplace_back(std::move(f));
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table read_csv_file(const std::filesystem::path& p) {
    auto in = detail::open_in(p);
    return read_csv(in);
}

inline double cell_as_double(const Cell& c) {
    if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&c)) return *d;
    throw invalid_argument("cell '" + std::get<std::string>(c) + "' is not numeric");
}

namespace detail {

inline Cell optional_cell(const std::optional<double>& v, const char* sentinel) {
    if (v) return *v;
    return std::string(sentinel);
}

}  // namespace detail

inline Table to_table(const RelativeErrorCurve& curve) {
    Table t{{"t", "r_omega", "r_phi", "r_varphi"}, {}};
    for (const auto& r : curve.rows)
        t.rows.push_back({r.t, detail::optional_cell(r.r_omega, "inf"), detail::optional_cell(r.r_phi, "inf"),
                          detail::optional_cell(r.r_varphi, "inf")});
    return t;
}

inline Table to_table(const std::vector<SweepRow>& rows) {
    Table t{{"g", "pair_count", "lambda", "mu_hat"}, {}};
    for (const auto& r : rows)
        t.rows.push_back({r.g, static_cast<std::int64_t>(r.pair_count), detail::optional_cell(r.lambda, "NA"),
                          detail::optional_cell(r.mu_hat, "NA")});
    return t;
}

// Writes a synthetic or in-memory dataset back to the two text formats.
inline void write_dataset(const SwadeshDataset& ds, std::ostream& lists, std::ostream& meta) {
    lists << "variety\tconcept\tword\n";
    for (std::size_t v = 0; v < ds.variety_count(); ++v)
        for (std::size_t c = 0; c < ds.concept_count(); ++c)
            lists << ds.varieties[v].id << '\t' << ds.concepts[c] << '\t' << utf8_encode(ds.words[v][c]) << '\n';
    meta << "variety,name,latitude,longitude,clade\n";
    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) {
            if (ch == '"') q += "\"\"";
            else q.push_back(ch);
        }
        return q + "\"";
    };
    for (const auto& v : ds.varieties)
        meta << quote(v.id) << ',' << quote(v.name) << ',' << format_double(v.latitude) << ','
             << format_double(v.longitude) << ',' << quote(v.clade) << '\n';
}

// ---------------------------------------------------------------------------
// Monte Carlo report

inline nlohmann::json to_json(const SimParams& p) {
    return {{"lambda", p.lambda}, {"mu", p.mu}, {"n_sym", p.n_sym}, {"l_word", p.l_word},
            {"m", p.m},           {"t", p.t},   {"seed", p.seed}};
}

inline nlohmann::json to_json(const StatMoments& s) {
    return {{"mean", s.mean}, {"var", s.variance}, {"se", s.se}, {"count", s.count}};
}

inline nlohmann::json monte_carlo_json(const SimParams& p, const SampleMoments& m, bool use_endpoint) {
    return {{"params", to_json(p)},
            {"replicates", m.replicates},
            {"sampler", use_endpoint ? "endpoint" : "events"},
            {"stats",
             {{"omega", to_json(m.omega)},
              {"phi", to_json(m.phi)},
              {"varphi", to_json(m.varphi)},
              {"chi", to_json(m.chi)}}},
            {"additivity", {{"residual", m.additivity_residual}, {"se", m.additivity_se}}}};
}

}  // namespace lexiclock
