#ifndef CEK_BENCHMARKS_BENCH_DATA_H_
#define CEK_BENCHMARKS_BENCH_DATA_H_

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace cek::bench {

struct Problem {
  Eigen::MatrixXd x;
  std::vector<double> y;
  std::vector<double> score;  // true Pr[y = 1 | x]
};

// Standard normal covariates with a logistic label model on the first three.
inline Problem MakeProblem(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> u;
  Problem p;
  p.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  p.y.resize(n);
  p.score.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double v = normal(rng);
      p.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      if (j < 3) z += (j == 1 ? -0.6 : 0.8) * v;
    }
    p.score[i] = 1.0 / (1.0 + std::exp(-z));
    p.y[i] = u(rng) < p.score[i] ? 1.0 : 0.0;
  }
  return p;
}

}  // namespace cek::bench

#endif  // CEK_BENCHMARKS_BENCH_DATA_H_
