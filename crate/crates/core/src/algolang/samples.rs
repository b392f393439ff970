//! Reference algorithms used by the sample question bank and the tests.

pub const IDENTITY: &str = "return input\n";

pub const CONSTANT_ZERO: &str = "return 0\n";

pub const SUM: &str = "\
set s to 0
for i from 0 to length(input) - 1 do
  set s to s + input[i]
end
return s
";

pub const PRODUCT: &str = "\
set p to 1
for i from 0 to length(input) - 1 do
  set p to p * input[i]
end
return p
";

pub const FIND_MAX_LEFT_TO_RIGHT: &str = "\
set m to input[0]
for i from 1 to length(input) - 1 do
  if input[i] > m then
    set m to input[i]
  end
end
return m
";

pub const FIND_MAX_RIGHT_TO_LEFT: &str = "\
set m to input[length(input) - 1]
set i to length(input) - 2
while i >= 0 do
  if input[i] > m then
    set m to input[i]
  end
  set i to i - 1
end
return m
";

pub const FIND_MIN: &str = "\
set m to input[0]
for i from 1 to length(input) - 1 do
  if input[i] < m then
    set m to input[i]
  end
end
return m
";

pub const REVERSE_IN_PLACE: &str = "\
set i to 0
set j to length(input) - 1
while i < j do
  swap(input, i, j)
  set i to i + 1
  set j to j - 1
end
return input
";

pub const REVERSE_BY_APPEND: &str = "\
set r to []
set i to length(input) - 1
while i >= 0 do
  set r to append(r, input[i])
  set i to i - 1
end
return r
";

/// Index of the first zero, or -1.
pub const LINEAR_SEARCH_ZERO: &str = "\
for i from 0 to length(input) - 1 do
  if input[i] == 0 then
    return i
  end
end
return -1
";

/// One left-to-right bubble-sort pass.
pub const BUBBLE_PASS: &str = "\
set a to input
for i from 0 to length(a) - 2 do
  if a[i] > a[i + 1] then
    swap(a, i, i + 1)
  end
end
return a
";

pub const COUNT_EVENS: &str = "\
set c to 0
for i from 0 to length(input) - 1 do
  if input[i] mod 2 == 0 then
    set c to c + 1
  end
end
return c
";

/// Keeps elements strictly greater than the first one.
pub const FILTER_ABOVE_FIRST: &str = "\
set out to []
for i from 1 to length(input) - 1 do
  if input[i] > input[0] then
    set out to append(out, input[i])
  end
end
return out
";

/// Every named sample, in a stable order.
pub const ALL: &[(&str, &str)] = &[
    ("identity", IDENTITY),
    ("constant_zero", CONSTANT_ZERO),
    ("sum", SUM),
    ("product", PRODUCT),
    ("find_max_lr", FIND_MAX_LEFT_TO_RIGHT),
    ("find_max_rl", FIND_MAX_RIGHT_TO_LEFT),
    ("find_min", FIND_MIN),
    ("reverse_in_place", REVERSE_IN_PLACE),
    ("reverse_by_append", REVERSE_BY_APPEND),
    ("linear_search_zero", LINEAR_SEARCH_ZERO),
    ("bubble_pass", BUBBLE_PASS),
    ("count_evens", COUNT_EVENS),
    ("filter_above_first", FILTER_ABOVE_FIRST),
];
