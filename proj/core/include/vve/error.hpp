// Copyright 2026 The vve-bridge Authors
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

#ifndef VVE__ERROR_HPP_
#define VVE__ERROR_HPP_

#include <stdexcept>
#include <string>

namespace vve
{

/// Base class for every error raised by the bridge libraries.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or out-of-range angle/coordinate input.
class DomainError : public Error
{
public:
  using Error::Error;
};

/// Geodetic projection guard violated (origin too close to a pole, pose too far from origin).
class ProjectionError : public Error
{
public:
  using Error::Error;
};

/// A pose tagged with one frame was handed to an operation expecting another.
class FrameMismatchError : public Error
{
public:
  using Error::Error;
};

/// Configuration file or command argument failed validation.
class ConfigError : public Error
{
public:
  using Error::Error;
};

}  // namespace vve

#endif  // VVE__ERROR_HPP_
