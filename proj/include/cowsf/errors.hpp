#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cowsf {

// Bad argument: out-of-domain probability, negative length, wrong attack shape.
class argument_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Intensities or overlaps that admit no unitary soft-filtering operation.
class infeasible_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A soft-filtering stage whose kind-averaged success probability is zero.
class degenerate_stage_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Replay script ran out of scripted draws.
class script_exhausted_error : public std::out_of_range {
 public:
  explicit script_exhausted_error(std::size_t draw_index)
      : std::out_of_range("replay script exhausted at draw " + std::to_string(draw_index)),
        draw_index_(draw_index) {}
  std::size_t draw_index() const noexcept { return draw_index_; }

 private:
  std::size_t draw_index_;
};

// Brute-force enumeration cap too small for the requested accuracy.
class truncation_error : public std::runtime_error {
 public:
  truncation_error(const std::string& what, double residual_mass)
      : std::runtime_error(what), residual_mass_(residual_mass) {}
  double residual_mass() const noexcept { return residual_mass_; }

 private:
  double residual_mass_;
};

}  // namespace cowsf
