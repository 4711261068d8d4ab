#pragma once

// Umbrella header.

#include "cgidp/common.hpp"
#include "cgidp/bernstein.hpp"
#include "cgidp/mesh.hpp"
#include "cgidp/field.hpp"
#include "cgidp/euler.hpp"
#include "cgidp/problems.hpp"
#include "cgidp/weno.hpp"
#include "cgidp/limiting.hpp"
#include "cgidp/idp.hpp"
#include "cgidp/time_integration.hpp"
#include "cgidp/study.hpp"
#include "cgidp/io.hpp"
#include "cgidp/driver.hpp"
