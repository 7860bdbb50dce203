#pragma once

#include "operslab/error.hpp"
#include "operslab/linalg.hpp"
#include "operslab/periodic.hpp"
#include "operslab/agd.hpp"
#include "operslab/curves.hpp"
#include "operslab/dsokolov.hpp"
#include "operslab/annulus.hpp"
#include "operslab/symplectic.hpp"
#include "operslab/io.hpp"
#include "operslab/svg.hpp"
