#pragma once

#include "noisyqd/core.hpp"
#include "noisyqd/fft.hpp"
#include "noisyqd/oscillator.hpp"
#include "noisyqd/propagation.hpp"
#include "noisyqd/ensemble.hpp"
#include "noisyqd/master.hpp"
#include "noisyqd/config.hpp"
#include "noisyqd/verify.hpp"
#include "noisyqd/run.hpp"
