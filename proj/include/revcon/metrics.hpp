// Classification metrics and inter-annotator agreement.
//
// compute_metrics is generic over a fixed class alphabet given as names;
// per-class precision/recall use the 0/0 -> 0 convention (with a warning),
// macro values are unweighted means, accuracy is trace/total.
// cohen_kappa works on any label alphabet; kappa for >2 annotators is the
// mean over annotator pairs restricted to co-annotated items.
#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "revcon/errors.hpp"

namespace revcon {

struct ClassMetrics {
  std::string name;
  std::size_t support = 0;  // gold items of this class
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  std::size_t total = 0;
  std::vector<std::vector<std::size_t>> confusion;  // [gold][pred]
  std::vector<std::string> warnings;
};

struct AgreementReport {
  double observed = 0.0;  // p_o
  double expected = 0.0;  // p_e
  double kappa = 0.0;
  std::size_t items = 0;
};

// gold/pred hold class indices into `class_names`.
inline MetricsReport compute_metrics(const std::vector<int>& gold, const std::vector<int>& pred,
                                     const std::vector<std::string>& class_names) {
  if (gold.size() != pred.size()) throw LengthMismatch(gold.size(), pred.size());
  if (gold.empty()) throw EmptyInput("no items to score");
  const std::size_t k = class_names.size();

  MetricsReport r;
  r.total = gold.size();
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || static_cast<std::size_t>(gold[i]) >= k ||
        pred[i] < 0 || static_cast<std::size_t>(pred[i]) >= k)
      throw DataError("label index out of range");
    ++r.confusion[gold[i]][pred[i]];
  }

  std::size_t correct = 0;
  for (std::size_t c = 0; c < k; ++c) correct += r.confusion[c][c];
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);

  for (std::size_t c = 0; c < k; ++c) {
    ClassMetrics m;
    m.name = class_names[c];
    std::size_t tp = r.confusion[c][c], fp = 0, fn = 0;
    for (std::size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += r.confusion[o][c];
      fn += r.confusion[c][o];
    }
    m.support = tp + fn;
    if (tp + fp == 0) {
      m.precision = 0.0;
      r.warnings.push_back("precision 0/0 for class '" + m.name + "' treated as 0");
    } else {
      m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    if (tp + fn == 0) {
      m.recall = 0.0;
      r.warnings.push_back("recall 0/0 for class '" + m.name + "' treated as 0");
    } else {
      m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    }
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    r.per_class.push_back(std::move(m));
  }

  for (const auto& m : r.per_class) {
    r.macro_precision += m.precision;
    r.macro_recall += m.recall;
    r.macro_f1 += m.f1;
  }
  const double dk = static_cast<double>(k);
  r.macro_precision /= dk;
  r.macro_recall /= dk;
  r.macro_f1 /= dk;
  return r;
}

template <typename Label>
AgreementReport cohen_kappa(const std::vector<Label>& a, const std::vector<Label>& b) {
  if (a.size() != b.size()) throw LengthMismatch(a.size(), b.size());
  if (a.empty()) throw EmptyInput("no items to compare");
  const double n = static_cast<double>(a.size());

  std::map<Label, double> pa, pb;
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[a[i]] += 1.0;
    pb[b[i]] += 1.0;
    if (a[i] == b[i]) agree += 1.0;
  }
  AgreementReport r;
  r.items = a.size();
  r.observed = agree / n;
  for (const auto& [label, ca] : pa) {
    auto it = pb.find(label);
    if (it != pb.end()) r.expected += (ca / n) * (it->second / n);
  }
  if (std::abs(1.0 - r.expected) < 1e-12) {
    // both raters constant: perfect agreement or none
    r.kappa = r.observed >= 1.0 - 1e-12 ? 1.0 : 0.0;
  } else {
    r.kappa = (r.observed - r.expected) / (1.0 - r.expected);
  }
  return r;
}

// Mean pairwise kappa over co-annotated items; annotator pairs with no
// overlap are skipped. Empty result set yields nullopt.
template <typename Label>
std::optional<double> average_pairwise_kappa(
    const std::vector<std::map<std::string, Label>>& annotators) {
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < annotators.size(); ++i) {
    for (std::size_t j = i + 1; j < annotators.size(); ++j) {
      std::vector<Label> a, b;
      for (const auto& [id, label] : annotators[i]) {
        auto it = annotators[j].find(id);
        if (it != annotators[j].end()) {
          a.push_back(label);
          b.push_back(it->second);
        }
      }
      if (a.empty()) continue;
      sum += cohen_kappa(a, b).kappa;
      ++pairs;
    }
  }
  if (pairs == 0) return std::nullopt;
  return sum / static_cast<double>(pairs);
}

inline nlohmann::ordered_json metrics_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["classes"] = nlohmann::ordered_json::object();
  for (const auto& m : r.per_class)
    j["classes"][m.name] = {{"precision", m.precision},
                            {"recall", m.recall},
                            {"f1", m.f1},
                            {"support", m.support}};
  j["macro"] = {{"precision", r.macro_precision},
                {"recall", r.macro_recall},
                {"f1", r.macro_f1}};
  j["accuracy"] = r.accuracy;
  j["total"] = r.total;
  j["confusion"] = r.confusion;
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j;
}

// Aligned table, columns ordered P, R, F1, Acc; accuracy shown on the macro row.
inline std::string metrics_to_table(const MetricsReport& r) {
  std::size_t width = 5;
  for (const auto& m : r.per_class) width = std::max(width, m.name.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width) + 2) << "class"
     << std::right << std::setw(8) << "P" << std::setw(8) << "R" << std::setw(8) << "F1"
     << std::setw(8) << "Acc" << "\n";
  os << std::fixed << std::setprecision(4);
  for (const auto& m : r.per_class) {
    os << std::left << std::setw(static_cast<int>(width) + 2) << m.name << std::right
       << std::setw(8) << m.precision << std::setw(8) << m.recall << std::setw(8) << m.f1
       << std::setw(8) << "" << "\n";
  }
  os << std::left << std::setw(static_cast<int>(width) + 2) << "macro" << std::right
     << std::setw(8) << r.macro_precision << std::setw(8) << r.macro_recall << std::setw(8)
     << r.macro_f1 << std::setw(8) << r.accuracy << "\n";
  return os.str();
}

inline nlohmann::ordered_json agreement_to_json(const AgreementReport& r) {
  return {{"observed_agreement", r.observed},
          {"expected_agreement", r.expected},
          {"kappa", r.kappa},
          {"items", r.items}};
}

}  // namespace revcon
