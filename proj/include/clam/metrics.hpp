#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "clam/simplex.hpp"

namespace clam {

/// Dispersion summary of a class-accuracy vector: range, sample standard
/// deviation (n-1 denominator), coefficient of variation std/mean, and the
/// mean accuracy of the worst floor(fraction * n) classes (at least one).
struct FairnessReport {
    double mean = 0.0;
    double range = 0.0;
    double stddev = 0.0;
    double cov = 0.0;
    double worst_fraction = 0.1;
    double worst_fraction_acc = 0.0;
    Vec per_class;
};

/// Aggregate of one metric across runs: mean and sample std (0 for a single run).
struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

FairnessReport fairness_report(const Vec &v, double worst_fraction = 0.1);

/// with_da.range - without_da.range; negative means the augmented run has the
/// narrower class-accuracy spread.
double range_difference(const FairnessReport &with_da, const FairnessReport &without_da);

MeanStd aggregate(const std::vector<double> &values);

/// Field-wise aggregate over reports (mean, range, std, cov, worst acc).
struct AggregateReport {
    MeanStd mean, range, stddev, cov, worst_fraction_acc;
};
AggregateReport aggregate(const std::vector<FairnessReport> &reports);

/// Flat JSON object for one report.
std::string report_json(const FairnessReport &r);

/// CSV row in the fixed column order std, cov, range, mean_acc, worst_acc,
/// prefixed by the given label.
std::string report_csv_row(const std::string &label, const FairnessReport &r);
std::string report_csv_header(const std::string &label_column);

}  // namespace clam
