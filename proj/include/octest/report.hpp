#pragma once

#include <optional>
#include <string>

namespace octest {

enum class Verdict { Warranted, NotWarranted, Indeterminate };

std::string to_string(Verdict v);

/// Warranted iff the randomness lower bound clears the threshold;
/// Indeterminate when either side is missing.
Verdict decide_verdict(std::optional<double> l_eta,
                       std::optional<double> threshold);

}  // namespace octest
