#pragma once

#include "errors.hpp"
#include "linalg.hpp"
#include "rng.hpp"
#include "quantum.hpp"
#include "statistics.hpp"
#include "distance.hpp"
#include "certifier.hpp"
#include "io.hpp"
#include "experiments.hpp"
