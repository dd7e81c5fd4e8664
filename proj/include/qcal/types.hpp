// Copyright 2026 The qcal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Core>

namespace qcal {

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using Vector2c = Eigen::Matrix<Complex<Scalar>, 2, 1>;

template <typename Scalar>
using Matrix2c = Eigen::Matrix<Complex<Scalar>, 2, 2>;

template <typename Scalar, int Dim>
using VectorN = Eigen::Matrix<Scalar, Dim, 1>;

using Vector2cd = Vector2c<double>;
using Matrix2cd = Matrix2c<double>;

/// Qubit energy eigenstates at the protocol endpoints, where the drive vanishes
/// and the eigenbasis coincides with the bare basis {|down>, |up>}.
enum class Level : std::uint8_t { down = 0, up = 1 };

/// Forward process or its time reversal.
enum class Direction : std::uint8_t { forward = 0, reversed = 1 };

inline constexpr int index_of(Level level) { return static_cast<int>(level); }

inline constexpr const char* to_string(Level level) {
  return level == Level::up ? "up" : "down";
}

inline constexpr const char* to_string(Direction direction) {
  return direction == Direction::forward ? "forward" : "reversed";
}

/// Bare basis vector |down> or |up>.
template <typename Scalar = double>
Vector2c<Scalar> basis_state(Level level) {
  Vector2c<Scalar> v = Vector2c<Scalar>::Zero();
  v(index_of(level)) = Complex<Scalar>(1);
  return v;
}

/// Lowering operator a = |down><up| in the bare basis.
template <typename Scalar = double>
Matrix2c<Scalar> bare_lowering() {
  Matrix2c<Scalar> a = Matrix2c<Scalar>::Zero();
  a(0, 1) = Complex<Scalar>(1);
  return a;
}

}  // namespace qcal
