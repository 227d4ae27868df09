#pragma once

#include "kimura/errors.hpp"
#include "kimura/evolution.hpp"
#include "kimura/fd_oracle.hpp"
#include "kimura/fixation.hpp"
#include "kimura/initial_measure.hpp"
#include "kimura/model.hpp"
#include "kimura/polynomial.hpp"
#include "kimura/runner.hpp"
#include "kimura/scenario.hpp"
#include "kimura/spectral.hpp"
#include "kimura/weak_form.hpp"
