// Copyright 2026 The tlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TLAB_TLAB_HPP_
#define TLAB_TLAB_HPP_

#include "tlab/checkpoint.hpp"
#include "tlab/corpus_io.hpp"
#include "tlab/decoder.hpp"
#include "tlab/edit_distance.hpp"
#include "tlab/errors.hpp"
#include "tlab/eval.hpp"
#include "tlab/linalg.hpp"
#include "tlab/logspace.hpp"
#include "tlab/model.hpp"
#include "tlab/mwer.hpp"
#include "tlab/rng.hpp"
#include "tlab/segmenter.hpp"
#include "tlab/synth.hpp"
#include "tlab/trainer.hpp"
#include "tlab/transducer.hpp"
#include "tlab/vocab.hpp"

#endif  // TLAB_TLAB_HPP_
