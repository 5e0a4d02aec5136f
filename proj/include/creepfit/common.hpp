// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace creepfit {

/// Numerical failure: divergence, singular or ill-conditioned systems.
class numerical_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Filesystem or format failure.
class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A referenced artifact (surrogate file, fixture, config) does not exist.
class missing_artifact_error : public io_error {
public:
  using io_error::io_error;
};

}  // namespace creepfit
