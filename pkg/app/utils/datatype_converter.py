# app/utils/datatype_converter.py
import pandas as pd
from app.utils.logger import logger

# pandas index 0 is file line 2 (line 1 holds the header)
HEADER_LINES = 1


class DataTypeConverter:
    """Utility class for coercing CSV columns to the datatypes a schema expects"""

    @staticmethod
    def convert_column_datatype(series, target_datatype):
        """
        Convert a pandas Series to the target datatype

        Args:
            series: pandas Series to convert
            target_datatype: string indicating target datatype ('number', 'integer' or 'string')

        Returns:
            tuple: (converted_series, bad_index) where bad_index lists the row labels that
            could not be converted
        """
        dtype = target_datatype.lower()
        if dtype in ['number', 'numeric', 'float']:
            converted = pd.to_numeric(series, errors='coerce')
            bad = converted.isna()
            return converted.astype(float), list(series.index[bad])

        if dtype in ['integer', 'int']:
            numeric = pd.to_numeric(series, errors='coerce')
            # Decimal parts are as malformed as text for integer columns
            bad = numeric.isna() | (numeric % 1 != 0)
            converted = numeric.where(~bad).astype('Int64')
            return converted, list(series.index[bad])

        if dtype in ['string', 'text']:
            bad = series.isna()
            return series.fillna('').astype(str), list(series.index[bad])

        raise ValueError(f"Unknown datatype: {target_datatype}")

    @staticmethod
    def convert_dataframe_columns(df, column_datatype_mapping):
        """
        Convert multiple columns in a dataframe based on mapping

        Args:
            df: pandas DataFrame read with dtype=str
            column_datatype_mapping: dict mapping column names to target datatypes

        Returns:
            tuple: (converted_df, errors) where errors maps a 1-based file line number
            to the list of offending columns
        """
        missing = [column for column in column_datatype_mapping if column not in df.columns]
        if missing:
            raise ValueError(f"Missing required columns: {', '.join(missing)}")

        converted_df = df.copy()
        errors = {}
        for column, datatype in column_datatype_mapping.items():
            converted_series, bad_index = DataTypeConverter.convert_column_datatype(
                converted_df[column], datatype
            )
            converted_df[column] = converted_series
            for label in bad_index:
                line = int(label) + HEADER_LINES + 1
                errors.setdefault(line, []).append(column)
            if bad_index:
                logger.error(f"Column '{column}' has {len(bad_index)} value(s) that are not {datatype}")

        return converted_df, dict(sorted(errors.items()))
