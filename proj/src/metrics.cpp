#include "clam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace clam {

FairnessReport fairness_report(const Vec &v, double worst_fraction) {
    const std::size_t n = v.size();
    if (n < 2) throw std::invalid_argument("fairness_report: need n >= 2");
    if (!(worst_fraction > 0.0 && worst_fraction <= 1.0))
        throw std::invalid_argument("fairness_report: worst_fraction must be in (0,1]");

    FairnessReport r;
    r.per_class = v;
    r.worst_fraction = worst_fraction;

    double sum = 0.0;
    double lo = v[0], hi = v[0];
    for (double x : v) {
        sum += x;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    r.mean = sum / static_cast<double>(n);
    r.range = hi - lo;

    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.stddev = std::sqrt(ss / static_cast<double>(n - 1));
    r.cov = r.mean > 0.0 ? r.stddev / r.mean : 0.0;

    const std::size_t k = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(worst_fraction * static_cast<double>(n))));
    Vec sorted = v;
    std::stable_sort(sorted.begin(), sorted.end());
    double worst_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) worst_sum += sorted[i];
    r.worst_fraction_acc = worst_sum / static_cast<double>(k);
    return r;
}

double range_difference(const FairnessReport &with_da, const FairnessReport &without_da) {
    if (with_da.per_class.size() != without_da.per_class.size())
        throw std::invalid_argument("range_difference: mismatched class counts");
    return with_da.range - without_da.range;
}

MeanStd aggregate(const std::vector<double> &values) {
    if (values.empty()) throw std::invalid_argument("aggregate: empty list");
    MeanStd out;
    for (double x : values) out.mean += x;
    out.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double x : values) ss += (x - out.mean) * (x - out.mean);
        out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

AggregateReport aggregate(const std::vector<FairnessReport> &reports) {
    if (reports.empty()) throw std::invalid_argument("aggregate: empty list");
    auto field = [&](double FairnessReport::*member) {
        std::vector<double> xs;
        xs.reserve(reports.size());
        for (const auto &r : reports) xs.push_back(r.*member);
        return aggregate(xs);
    };
    AggregateReport out;
    out.mean = field(&FairnessReport::mean);
    out.range = field(&FairnessReport::range);
    out.stddev = field(&FairnessReport::stddev);
    out.cov = field(&FairnessReport::cov);
    out.worst_fraction_acc = field(&FairnessReport::worst_fraction_acc);
    return out;
}

std::string report_json(const FairnessReport &r) {
    nlohmann::json j;
    j["mean"] = r.mean;
    j["range"] = r.range;
    j["std"] = r.stddev;
    j["cov"] = r.cov;
    j["worst_fraction"] = r.worst_fraction;
    j["worst_fraction_acc"] = r.worst_fraction_acc;
    j["per_class"] = r.per_class;
    return j.dump();
}

std::string report_csv_header(const std::string &label_column) {
    return label_column + ",std,cov,range,mean_acc,worst_acc";
}

std::string report_csv_row(const std::string &label, const FairnessReport &r) {
    std::ostringstream os;
    os.precision(10);
    os << label << ',' << r.stddev << ',' << r.cov << ',' << r.range << ',' << r.mean << ','
       << r.worst_fraction_acc;
    return os.str();
}

}  // namespace clam
