/*
 * Copyright 2026 The madlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MADLAB_ERROR_HPP
#define MADLAB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace madlab
{

/// Base of every error raised by the library.
class Error : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

class InvalidTrajectory : public Error
{
 public:
  using Error::Error;
};

/// Malformed input file; the message carries the offending line number.
class ParseError : public Error
{
 public:
  using Error::Error;
};

/// Bad experiment configuration; the message carries the key path.
class ConfigError : public Error
{
 public:
  using Error::Error;
};

/// Degenerate statistical input (zero variance, too few samples, ...).
class DegenerateSample : public Error
{
 public:
  using Error::Error;
};

}  // namespace madlab

#endif  // MADLAB_ERROR_HPP
