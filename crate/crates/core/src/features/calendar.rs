//! Academic calendar: semester and holiday ranges, class-day overrides, and
//! the six-way day categorisation derived from them.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kv::KvFile;

/// Inclusive date interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DateRange {
    pub first: NaiveDate,
    pub last: NaiveDate,
}

impl DateRange {
    pub fn new(first: NaiveDate, last: NaiveDate) -> Result<Self> {
        if last < first {
            return Err(Error::InvalidInput(format!("date range {first}..{last} is reversed")));
        }
        Ok(Self { first, last })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.first <= date && date <= self.last
    }
}

impl FromStr for DateRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| format!("expected YYYY-MM-DD..YYYY-MM-DD, got `{s}`"))?;
        let first = parse_date(a.trim())?;
        let last = parse_date(b.trim())?;
        DateRange::new(first, last).map_err(|e| e.to_string())
    }
}

impl fmt::Display for DateRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.first, self.last)
    }
}

fn parse_date(s: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| format!("bad date `{s}`: {e}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DayCategory {
    SemWeekday,
    SemWeekend,
    SummerWeekday,
    SummerWeekend,
    HolidayWeekday,
    HolidayWeekend,
}

impl DayCategory {
    pub const ALL: [DayCategory; 6] = [
        DayCategory::SemWeekday,
        DayCategory::SemWeekend,
        DayCategory::SummerWeekday,
        DayCategory::SummerWeekend,
        DayCategory::HolidayWeekday,
        DayCategory::HolidayWeekend,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DayCategory::SemWeekday => "sem_weekday",
            DayCategory::SemWeekend => "sem_weekend",
            DayCategory::SummerWeekday => "summer_weekday",
            DayCategory::SummerWeekend => "summer_weekend",
            DayCategory::HolidayWeekday => "holiday_weekday",
            DayCategory::HolidayWeekend => "holiday_weekend",
        }
    }

    pub fn is_weekend(self) -> bool {
        matches!(
            self,
            DayCategory::SemWeekend | DayCategory::SummerWeekend | DayCategory::HolidayWeekend
        )
    }
}

pub fn is_weekend(date: NaiveDate) -> bool {
    matches!(date.weekday(), Weekday::Sat | Weekday::Sun)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CalendarSpec {
    pub semesters: Vec<DateRange>,
    pub holidays: Vec<DateRange>,
    /// Explicit class-day flags that override the weekday-in-semester rule.
    pub class_overrides: BTreeMap<NaiveDate, bool>,
    /// Dates the calendar speaks for. Defaults to the whole calendar years
    /// spanned by the listed ranges.
    pub coverage: Option<DateRange>,
}

fn check_ordered(ranges: &mut [DateRange], what: &str) -> Result<()> {
    ranges.sort();
    for w in ranges.windows(2) {
        if w[1].first <= w[0].last {
            return Err(Error::InvalidInput(format!("overlapping {what} ranges {} and {}", w[0], w[1])));
        }
    }
    Ok(())
}

impl CalendarSpec {
    pub fn new(
        mut semesters: Vec<DateRange>,
        mut holidays: Vec<DateRange>,
        class_overrides: BTreeMap<NaiveDate, bool>,
        coverage: Option<DateRange>,
    ) -> Result<Self> {
        check_ordered(&mut semesters, "semester")?;
        check_ordered(&mut holidays, "holiday")?;
        Ok(Self {
            semesters,
            holidays,
            class_overrides,
            coverage,
        })
    }

    pub fn coverage(&self) -> Option<DateRange> {
        if let Some(c) = self.coverage {
            return Some(c);
        }
        let dates = self
            .semesters
            .iter()
            .chain(&self.holidays)
            .flat_map(|r| [r.first, r.last])
            .chain(self.class_overrides.keys().copied());
        let (lo, hi) = dates.fold((None::<NaiveDate>, None::<NaiveDate>), |(lo, hi), d| {
            (Some(lo.map_or(d, |l| l.min(d))), Some(hi.map_or(d, |h| h.max(d))))
        });
        Some(DateRange {
            first: NaiveDate::from_ymd_opt(lo?.year(), 1, 1)?,
            last: NaiveDate::from_ymd_opt(hi?.year(), 12, 31)?,
        })
    }

    fn check_covered(&self, date: NaiveDate) -> Result<()> {
        match self.coverage() {
            Some(c) if c.contains(date) => Ok(()),
            _ => Err(Error::OutsideCalendar(date.to_string())),
        }
    }

    pub fn is_holiday(&self, date: NaiveDate) -> bool {
        self.holidays.iter().any(|r| r.contains(date))
    }

    pub fn in_semester(&self, date: NaiveDate) -> bool {
        self.semesters.iter().any(|r| r.contains(date))
    }

    /// Holiday ranges take precedence over semester ranges; dates in neither
    /// fall in the summer categories.
    pub fn day_category(&self, date: NaiveDate) -> Result<DayCategory> {
        self.check_covered(date)?;
        let weekend = is_weekend(date);
        Ok(match (self.is_holiday(date), self.in_semester(date), weekend) {
            (true, _, false) => DayCategory::HolidayWeekday,
            (true, _, true) => DayCategory::HolidayWeekend,
            (false, true, false) => DayCategory::SemWeekday,
            (false, true, true) => DayCategory::SemWeekend,
            (false, false, false) => DayCategory::SummerWeekday,
            (false, false, true) => DayCategory::SummerWeekend,
        })
    }

    /// 1 on instruction days: semester weekdays that are not holidays, unless
    /// overridden.
    pub fn class_binary(&self, date: NaiveDate) -> Result<u8> {
        self.check_covered(date)?;
        if let Some(&flag) = self.class_overrides.get(&date) {
            return Ok(u8::from(flag));
        }
        Ok(u8::from(self.day_category(date)? == DayCategory::SemWeekday))
    }

    /// Parses `semester = A..B`, `holiday = A..B`, `class_override = D,0|1`
    /// and an optional `coverage = A..B`.
    pub fn from_kv(kv: &KvFile) -> Result<Self> {
        let ranges = |key: &str| -> Result<Vec<DateRange>> {
            kv.all(key).map(|e| kv.parse_value::<DateRange>(e)).collect()
        };
        let mut overrides = BTreeMap::new();
        for e in kv.all("class_override") {
            let (d, flag) = e
                .value
                .split_once(',')
                .ok_or_else(|| Error::format(kv.location(e), "expected `class_override = YYYY-MM-DD,0|1`"))?;
            let date = parse_date(d.trim()).map_err(|m| Error::format(kv.location(e), m))?;
            let flag = match flag.trim() {
                "0" => false,
                "1" => true,
                other => return Err(Error::format(kv.location(e), format!("class flag must be 0 or 1, got `{other}`"))),
            };
            overrides.insert(date, flag);
        }
        let coverage = kv.get(None, "coverage").map(|e| kv.parse_value::<DateRange>(e)).transpose()?;
        Self::new(ranges("semester")?, ranges("holiday")?, overrides, coverage)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_kv(&KvFile::read(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# academic calendar\n");
        if let Some(c) = self.coverage {
            out.push_str(&format!("coverage = {c}\n"));
        }
        for s in &self.semesters {
            out.push_str(&format!("semester = {s}\n"));
        }
        for h in &self.holidays {
            out.push_str(&format!("holiday = {h}\n"));
        }
        for (d, f) in &self.class_overrides {
            out.push_str(&format!("class_override = {d},{}\n", u8::from(*f)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn cal() -> CalendarSpec {
        let kv = KvFile::parse(
            "semester = 2019-01-14..2019-05-10\nsemester = 2019-08-19..2019-12-13\n\
             holiday = 2019-03-16..2019-03-24\nholiday = 2019-11-25..2019-11-29\n\
             class_override = 2019-05-06,0\n",
            "cal",
        )
        .unwrap();
        CalendarSpec::from_kv(&kv).unwrap()
    }

    #[test]
    fn categories() {
        let c = cal();
        // Tuesday in spring semester
        assert_eq!(c.day_category(d(2019, 2, 5)).unwrap(), DayCategory::SemWeekday);
        // Saturday in spring break
        assert_eq!(c.day_category(d(2019, 3, 16)).unwrap(), DayCategory::HolidayWeekend);
        // Wednesday in July
        assert_eq!(c.day_category(d(2019, 7, 10)).unwrap(), DayCategory::SummerWeekday);
        assert_eq!(c.day_category(d(2019, 7, 13)).unwrap(), DayCategory::SummerWeekend);
        assert!(matches!(c.day_category(d(2020, 1, 2)), Err(Error::OutsideCalendar(_))));
    }

    #[test]
    fn class_days() {
        let c = cal();
        assert_eq!(c.class_binary(d(2019, 2, 5)).unwrap(), 1);
        assert_eq!(c.class_binary(d(2019, 3, 19)).unwrap(), 0);
        // exam-week Monday overridden to non-class
        assert_eq!(c.class_binary(d(2019, 5, 6)).unwrap(), 0);
        assert_eq!(c.class_binary(d(2019, 2, 9)).unwrap(), 0);
    }

    #[test]
    fn rejects_overlap_and_bad_lines() {
        let kv = KvFile::parse("semester = 2019-01-01..2019-05-01\nsemester = 2019-04-01..2019-06-01\n", "c").unwrap();
        assert!(CalendarSpec::from_kv(&kv).is_err());
        let kv = KvFile::parse("holiday = 2019-01-01\n", "c").unwrap();
        let err = CalendarSpec::from_kv(&kv).unwrap_err();
        assert!(err.to_string().starts_with("c:1"), "{err}");
    }

    #[test]
    fn text_round_trip() {
        let c = cal();
        let back = CalendarSpec::from_kv(&KvFile::parse(&c.to_text(), "t").unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
