"""Rebuild the original IBM HR attrition CSV from the copy bundled in ``rdatasets``.

``rdatasets`` ships R's ``modeldata::attrition``: the same 1470 employees in the
same order, with the four constant/id columns removed and several ordinal codes
replaced by factor labels. Every change is invertible (the R row names carry the
original EmployeeNumber), so the 35-column file is recovered exactly.

    pip install rdatasets
    python scripts/reconstruct_ibm_csv.py src/attrition/data/WA_Fn-UseC_-HR-Employee-Attrition.csv
"""
import csv
import sys

from rdatasets import data

COLUMNS = [
    "Age", "Attrition", "BusinessTravel", "DailyRate", "Department",
    "DistanceFromHome", "Education", "EducationField", "EmployeeCount",
    "EmployeeNumber", "EnvironmentSatisfaction", "Gender", "HourlyRate",
    "JobInvolvement", "JobLevel", "JobRole", "JobSatisfaction", "MaritalStatus",
    "MonthlyIncome", "MonthlyRate", "NumCompaniesWorked", "Over18", "OverTime",
    "PercentSalaryHike", "PerformanceRating", "RelationshipSatisfaction",
    "StandardHours", "StockOptionLevel", "TotalWorkingYears",
    "TrainingTimesLastYear", "WorkLifeBalance", "YearsAtCompany",
    "YearsInCurrentRole", "YearsSinceLastPromotion", "YearsWithCurrManager",
]

LEVEL4 = {"Low": 1, "Medium": 2, "High": 3, "Very_High": 4}
ORDINAL = {
    "Education": {"Below_College": 1, "College": 2, "Bachelor": 3, "Master": 4, "Doctor": 5},
    "EnvironmentSatisfaction": LEVEL4,
    "JobInvolvement": LEVEL4,
    "JobSatisfaction": LEVEL4,
    "RelationshipSatisfaction": LEVEL4,
    "WorkLifeBalance": {"Bad": 1, "Good": 2, "Better": 3, "Best": 4},
    "PerformanceRating": {"Low": 1, "Good": 2, "Excellent": 3, "Outstanding": 4},
}
# R factor levels had spaces and '&' replaced by underscores.
TEXT = {
    "Research_Development": "Research & Development",
    "Human_Resources": "Human Resources",
    "Life_Sciences": "Life Sciences",
    "Technical_Degree": "Technical Degree",
}
UNDERSCORED = ("Department", "EducationField", "JobRole")


def reconstruct(path):
    df = data("modeldata", "attrition")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for rec in df.to_dict("records"):
            row = dict(rec)
            row["EmployeeNumber"] = rec["rownames"]
            row["EmployeeCount"] = 1
            row["StandardHours"] = 80
            row["Over18"] = "Y"
            for col, levels in ORDINAL.items():
                row[col] = levels[rec[col]]
            for col in UNDERSCORED:
                row[col] = TEXT.get(rec[col], rec[col].replace("_", " "))
            writer.writerow([row[c] for c in COLUMNS])
    return len(df)


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "WA_Fn-UseC_-HR-Employee-Attrition.csv"
    print(f"wrote {reconstruct(out)} rows to {out}")
