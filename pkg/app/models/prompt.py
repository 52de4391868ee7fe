"""
提示模板相关的Pydantic模型
"""
from pydantic import BaseModel, ConfigDict, Field


class PromptTemplate(BaseModel):
    """
    提示模板

    两部分文本，使用 {slot} 占位符（str.format 语法）
    """

    model_config = ConfigDict(frozen=True)

    system_template: str
    user_template: str


class PromptBundle(BaseModel):
    """发送给LLM的一组消息"""

    model_config = ConfigDict(frozen=True)

    system_text: str
    user_text: str
    expected_length: int = Field(..., gt=0, description="期望的输出长度 (= n_total)")
