#pragma once

#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gradft {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Domain { InDomain, OutOfDomain };

inline const char* domain_tag(Domain d) { return d == Domain::InDomain ? "in" : "out"; }

struct Example {
  std::vector<double> features;
  int label = 0;
  Domain domain = Domain::InDomain;
  std::string source;  // free-form provenance, ignored by all algorithms
};

struct Dataset {
  std::vector<Example> examples;
  std::size_t feature_dim = 0;
  std::size_t num_classes = 0;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }

  // Empty dataset carrying the same shape metadata.
  Dataset like() const { return Dataset{{}, feature_dim, num_classes}; }
};

// Ordered out-of-domain example counts, one per fine-tuning stage.
// Strictly decreasing; the last amount need not be zero (a single-amount
// schedule expresses mixed-only training).
class Schedule {
 public:
  static Schedule from_amounts(std::vector<std::size_t> amounts) {
    if (amounts.empty()) throw Error("schedule must have at least one stage");
    for (std::size_t i = 0; i + 1 < amounts.size(); ++i) {
      if (amounts[i] <= amounts[i + 1]) {
        std::ostringstream os;
        os << "schedule amounts must be strictly decreasing: " << amounts[i] << " -> "
           << amounts[i + 1] << " at stage " << i;
        throw Error(os.str());
      }
    }
    return Schedule(std::move(amounts));
  }

  const std::vector<std::size_t>& amounts() const { return amounts_; }
  std::size_t stages() const { return amounts_.size(); }

  std::string to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < amounts_.size(); ++i) {
      if (i) os << ",";
      os << amounts_[i];
    }
    return os.str();
  }

  bool operator==(const Schedule& other) const { return amounts_ == other.amounts_; }

 private:
  explicit Schedule(std::vector<std::size_t> a) : amounts_(std::move(a)) {}
  std::vector<std::size_t> amounts_;
};

// "4000,2000,500,0" (commas and/or whitespace) -> Schedule.
inline Schedule parse_schedule(const std::string& text) {
  std::string normalized = text;
  for (char& c : normalized)
    if (c == ',') c = ' ';
  std::istringstream is(normalized);
  std::vector<std::size_t> amounts;
  std::string tok;
  while (is >> tok) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &pos);
    } catch (const std::exception&) {
      throw Error("schedule: non-integer token '" + tok + "'");
    }
    if (pos != tok.size() || v < 0) throw Error("schedule: non-integer token '" + tok + "'");
    amounts.push_back(static_cast<std::size_t>(v));
  }
  return Schedule::from_amounts(std::move(amounts));
}

struct Metrics {
  double accuracy = 0.0;
  std::vector<std::optional<double>> per_class_accuracy;  // absent for empty classes
  double mean_loss = 0.0;
  std::size_t n = 0;
};

// Returns every invariant violation; empty result means the dataset is valid.
inline std::vector<std::string> validate_dataset(const Dataset& d) {
  std::vector<std::string> violations;
  for (std::size_t i = 0; i < d.examples.size(); ++i) {
    const Example& e = d.examples[i];
    if (e.features.size() != d.feature_dim) {
      std::ostringstream os;
      os << "example " << i << ": feature length " << e.features.size() << " != feature_dim "
         << d.feature_dim;
      violations.push_back(os.str());
    }
    if (e.label < 0 || static_cast<std::size_t>(e.label) >= d.num_classes) {
      std::ostringstream os;
      os << "example " << i << ": label " << e.label << " out of range [0, " << d.num_classes
         << ")";
      violations.push_back(os.str());
    }
  }
  return violations;
}

}  // namespace gradft
