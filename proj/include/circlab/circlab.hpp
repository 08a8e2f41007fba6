#pragma once

#include "circle.hpp"
#include "cf.hpp"
#include "pmap.hpp"
#include "rotation.hpp"
#include "partitions.hpp"
#include "constants.hpp"
#include "rng.hpp"
#include "verifiers.hpp"
#include "conjugacy.hpp"
