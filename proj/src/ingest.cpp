#include "octest/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "octest/errors.hpp"

namespace octest {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(trim(field));
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  out.push_back(trim(field));
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Header {
  std::map<std::string, std::size_t> index;

  std::size_t at(const std::string& name) const {
    const auto it = index.find(name);
    if (it == index.end()) throw MissingColumn("missing column: " + name);
    return it->second;
  }
};

std::optional<bool> map_binary(const std::string& raw,
                               const MicrodataSpec& spec) {
  const std::string v = lower(trim(raw));
  for (const auto& t : spec.true_values)
    if (v == lower(t)) return true;
  for (const auto& f : spec.false_values)
    if (v == lower(f)) return false;
  return std::nullopt;
}

bool eval_derived(const DerivedColumn& d, const std::string& raw,
                  bool* ok) {
  char* end = nullptr;
  const std::string t = trim(raw);
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) {
    *ok = false;
    return false;
  }
  *ok = true;
  if (d.op == "<") return v < d.constant;
  if (d.op == "<=") return v <= d.constant;
  if (d.op == ">") return v > d.constant;
  if (d.op == ">=") return v >= d.constant;
  return v == d.constant;  // "=="
}

struct Row {
  bool exposure = false;
  bool outcome = false;
  std::string stratum_label;
  bool usable = false;
};

template <typename RowFn>
void scan(std::istream& csv, const MicrodataSpec& spec, bool stratified,
          std::uint64_t* rows, std::uint64_t* excluded, RowFn&& fn) {
  std::string line;
  if (!std::getline(csv, line)) throw ParseError("empty input: no header row");
  Header header;
  {
    const auto names = split_csv_line(line);
    for (std::size_t i = 0; i < names.size(); ++i) header.index[names[i]] = i;
  }
  if (spec.exposure_column.empty() || spec.outcome_column.empty()) {
    throw ParseError("spec must name exposure and outcome columns");
  }
  const std::size_t e_idx = header.at(spec.exposure_column);
  const std::size_t d_idx = header.at(spec.outcome_column);

  // Covariates may be raw columns or derived ones.
  struct CovariateRef {
    std::string name;
    bool is_derived = false;
    std::size_t column = 0;
    DerivedColumn derived;
  };
  std::vector<CovariateRef> covs;
  if (stratified) {
    if (spec.covariate_columns.empty()) {
      throw ParseError("stratified load needs covariate columns");
    }
    for (const auto& name : spec.covariate_columns) {
      CovariateRef ref;
      ref.name = name;
      const auto dit = std::find_if(
          spec.derived.begin(), spec.derived.end(),
          [&](const DerivedColumn& d) { return d.name == name; });
      if (dit != spec.derived.end()) {
        ref.is_derived = true;
        ref.derived = *dit;
        ref.column = header.at(dit->source);
      } else {
        ref.column = header.at(name);
      }
      covs.push_back(ref);
    }
  }

  while (std::getline(csv, line)) {
    if (trim(line).empty()) continue;
    ++*rows;
    const auto fields = split_csv_line(line);
    const auto get = [&](std::size_t idx) -> const std::string& {
      static const std::string empty;
      return idx < fields.size() ? fields[idx] : empty;
    };

    Row row;
    const auto e = map_binary(get(e_idx), spec);
    const auto d = map_binary(get(d_idx), spec);
    bool bad = !e.has_value() || !d.has_value();
    if (!bad && stratified) {
      std::string label;
      for (const auto& cov : covs) {
        std::string value;
        if (cov.is_derived) {
          bool ok = false;
          const bool bit = eval_derived(cov.derived, get(cov.column), &ok);
          if (!ok) {
            bad = true;
            break;
          }
          value = bit ? "1" : "0";
        } else {
          value = trim(get(cov.column));
          if (value.empty()) {
            bad = true;
            break;
          }
        }
        if (!label.empty()) label += ",";
        label += cov.name + "=" + value;
      }
      row.stratum_label = label;
    }
    if (bad) {
      if (spec.policy == MissingPolicy::Strict) {
        throw UnmappableValue("row " + std::to_string(*rows) +
                              " has an unmappable value");
      }
      ++*excluded;
      continue;
    }
    row.exposure = *e;
    row.outcome = *d;
    row.usable = true;
    fn(row);
  }
}

void bump(Counts2x2& c, bool e, bool d) {
  if (!e && d) ++c.x01;
  else if (e && d) ++c.x11;
  else if (!e && !d) ++c.x00;
  else ++c.x10;
}

}  // namespace

MicrodataSpec parse_spec(std::istream& in) {
  MicrodataSpec spec;
  spec.true_values.clear();
  spec.false_values.clear();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;

    if (t.rfind("derive ", 0) == 0) {
      // derive <name> = <column> <op> <constant>
      std::istringstream ss(t.substr(7));
      DerivedColumn d;
      std::string eq, cst;
      if (!(ss >> d.name >> eq >> d.source >> d.op >> cst) || eq != "=") {
        throw ParseError("bad derive line " + std::to_string(lineno));
      }
      static const char* ops[] = {"<", "<=", ">", ">=", "=="};
      if (std::find_if(std::begin(ops), std::end(ops), [&](const char* o) {
            return d.op == o;
          }) == std::end(ops)) {
        throw ParseError("bad operator in derive line " +
                         std::to_string(lineno));
      }
      try {
        d.constant = std::stod(cst);
      } catch (const std::exception&) {
        throw ParseError("bad constant in derive line " +
                         std::to_string(lineno));
      }
      spec.derived.push_back(d);
      continue;
    }

    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected key = value at line " +
                       std::to_string(lineno));
    }
    const std::string key = lower(trim(t.substr(0, eq)));
    const std::string value = trim(t.substr(eq + 1));
    if (key == "exposure") {
      spec.exposure_column = value;
    } else if (key == "outcome") {
      spec.outcome_column = value;
    } else if (key == "covariates") {
      spec.covariate_columns = split_list(value);
    } else if (key == "true_values") {
      spec.true_values = split_list(value);
    } else if (key == "false_values") {
      spec.false_values = split_list(value);
    } else if (key == "missing_policy") {
      const std::string v = lower(value);
      if (v == "drop") spec.policy = MissingPolicy::Drop;
      else if (v == "strict") spec.policy = MissingPolicy::Strict;
      else throw ParseError("missing_policy must be drop or strict");
    } else {
      throw ParseError("unknown spec key: " + key);
    }
  }
  if (spec.true_values.empty()) spec.true_values = {"1", "yes", "true"};
  if (spec.false_values.empty()) spec.false_values = {"0", "no", "false"};
  return spec;
}

CountsResult load_counts(std::istream& csv, const MicrodataSpec& spec) {
  CountsResult out;
  scan(csv, spec, false, &out.rows, &out.excluded, [&](const Row& row) {
    bump(out.counts, row.exposure, row.outcome);
  });
  if (out.counts.total() == 0) throw EmptyTable("no usable rows");
  return out;
}

StratifiedResult load_stratified(std::istream& csv,
                                 const MicrodataSpec& spec) {
  StratifiedResult out;
  std::map<std::string, Counts2x2> cells;  // ordered -> deterministic strata
  scan(csv, spec, true, &out.rows, &out.excluded, [&](const Row& row) {
    bump(cells[row.stratum_label], row.exposure, row.outcome);
  });
  if (cells.empty()) throw EmptyTable("no usable rows");
  for (auto& [label, counts] : cells) {
    out.table.strata.push_back({label, counts});
  }
  return out;
}

std::uint64_t ipw_hospitalized_adjust(std::uint64_t deaths,
                                      std::uint64_t survivors,
                                      double effectiveness) {
  if (!(effectiveness >= 0 && effectiveness < 1)) {
    throw DomainError("effectiveness must lie in [0,1)");
  }
  const double total = static_cast<double>(deaths + survivors);
  const std::int64_t scaled = std::llround(total / (1 - effectiveness));
  const std::int64_t adjusted = scaled - static_cast<std::int64_t>(deaths);
  return adjusted < 0 ? 0 : static_cast<std::uint64_t>(adjusted);
}

}  // namespace octest
