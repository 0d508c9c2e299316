#include "octest/report.hpp"

namespace octest {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Warranted: return "warranted";
    case Verdict::NotWarranted: return "not_warranted";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

Verdict decide_verdict(std::optional<double> l_eta,
                       std::optional<double> threshold) {
  if (!l_eta.has_value() || !threshold.has_value()) {
    return Verdict::Indeterminate;
  }
  return *l_eta > *threshold ? Verdict::Warranted : Verdict::NotWarranted;
}

}  // namespace octest
