#include "uavrsma/signal_model.hpp"

#include <stdexcept>

namespace uavrsma {

namespace {

void check_dims(const ChannelVector& h, const Precoder& precoder) {
  if (h.coefficients.size() != precoder.columns.rows()) {
    throw std::invalid_argument("channel/precoder dimension mismatch");
  }
}

double stream_power(const ChannelVector& h, const Precoder& precoder, int col) {
  const std::complex<double> g = h.coefficients.adjoint() * precoder.columns.col(col);
  return std::norm(g);
}

}  // namespace

double common_sinr(const ChannelVector& h, const Precoder& precoder, double sigma2) {
  check_dims(h, precoder);
  const int k_users = precoder.num_users();
  double interference = sigma2;
  for (int i = 1; i <= k_users; ++i) interference += stream_power(h, precoder, i);
  return stream_power(h, precoder, 0) / interference;
}

double private_sinr(const ChannelVector& h, const Precoder& precoder, int k,
                    double sigma2) {
  check_dims(h, precoder);
  const int k_users = precoder.num_users();
  if (k < 0 || k >= k_users) throw std::out_of_range("private_sinr: user index");
  double interference = sigma2;
  for (int i = 1; i <= k_users; ++i) {
    if (i == k + 1) continue;
    interference += stream_power(h, precoder, i);
  }
  return stream_power(h, precoder, k + 1) / interference;
}

double common_rate_cap(const std::vector<ChannelVector>& channels,
                       const Precoder& precoder, double sigma2) {
  if (channels.empty()) throw std::invalid_argument("common_rate_cap: no users");
  double cap = std::numeric_limits<double>::infinity();
  for (const auto& h : channels) {
    cap = std::min(cap, rate_from_sinr(common_sinr(h, precoder, sigma2)));
  }
  return cap;
}

RateReport rate_report(const std::vector<ChannelVector>& channels,
                       const Precoder& precoder, const RateSplit& split,
                       const Eigen::VectorXd& weights, double sigma2) {
  const int k_users = static_cast<int>(channels.size());
  if (precoder.num_users() != k_users ||
      split.common_portions.size() != k_users || weights.size() != k_users) {
    throw std::invalid_argument("rate_report: dimension mismatch");
  }
  const double cap = common_rate_cap(channels, precoder, sigma2);
  if (split.total() > cap + kFeasTol) {
    throw std::invalid_argument("rate_report: common-rate split exceeds cap");
  }
  if (split.common_portions.minCoeff() < -kFeasTol) {
    throw std::invalid_argument("rate_report: negative common-rate portion");
  }

  RateReport report;
  report.common_rates.resize(k_users);
  report.private_rates.resize(k_users);
  report.overall_rates.resize(k_users);
  for (int k = 0; k < k_users; ++k) {
    report.common_rates(k) = rate_from_sinr(common_sinr(channels[k], precoder, sigma2));
    report.private_rates(k) =
        rate_from_sinr(private_sinr(channels[k], precoder, k, sigma2));
    report.overall_rates(k) = split.common_portions(k) + report.private_rates(k);
  }
  report.wsr = weights.dot(report.overall_rates);
  return report;
}

}  // namespace uavrsma
